import os
import threading
import time
from unittest.mock import patch

import pytest

from creditvar import util


class TestUtil():
    """Class to test utility functions in creditvar.util"""

    @pytest.mark.parametrize("threads, expected", [
        (None, 8), (1, 1), (4, 4), (32, 8), (0, 1), (-3, 1),
    ])
    def test_resolve_workers(self, threads, expected):
        """Test that the worker count is capped by the logical CPU count."""
        with patch('creditvar.util.psutil.cpu_count', return_value=8):
            assert util.resolve_workers(threads) == expected

    def test_resolve_workers_unknown_cpu_count(self):
        """Test that an unknown CPU count falls back to a single worker."""
        with patch('creditvar.util.psutil.cpu_count', return_value=None):
            assert util.resolve_workers() == 1

    def test_chunk_ranges(self):
        """Test that chunk ranges cover the full range in order."""
        assert util.chunk_ranges(10, 4) == [(0, 4), (4, 8), (8, 10)]
        assert util.chunk_ranges(8, 4) == [(0, 4), (4, 8)]
        assert util.chunk_ranges(0, 4) == []

    def test_chunk_ranges_default_size(self):
        """Test the default chunk size."""
        ranges = util.chunk_ranges(5000)
        assert ranges[0] == (0, util.NODE_CHUNK_SIZE)
        assert ranges[-1][1] == 5000

    def test_run_in_executor_serial(self):
        """Test that a single worker runs tasks in the calling thread."""
        caller = threading.get_ident()
        results = util.run_in_executor(lambda task: (task, threading.get_ident()), [1, 2, 3])
        assert [result[0] for result in results] == [1, 2, 3]
        assert all(result[1] == caller for result in results)

    def test_run_in_executor_order(self):
        """Test that results come back in task order whatever the completion order."""
        def slow_first(task):
            time.sleep(0.05 if task == 0 else 0.0)
            return task * task

        assert util.run_in_executor(slow_first, range(6), workers=3) == [0, 1, 4, 9, 16, 25]

    def test_run_in_executor_raises(self):
        """Test that an exception in a task propagates to the caller."""
        def failing(task):
            if task == 2:
                raise ValueError("bad task")
            return task

        with pytest.raises(ValueError, match="bad task"):
            util.run_in_executor(failing, range(4), workers=2)

    def test_atomic_write_text(self, tmp_path):
        """Test that text is written as UTF-8 and no temporary file is left behind."""
        path = tmp_path / 'out.csv'
        util.atomic_write(str(path), 'x,cdf\n0.1,0.5\n')
        assert path.read_text(encoding='utf-8') == 'x,cdf\n0.1,0.5\n'
        assert os.listdir(str(tmp_path)) == ['out.csv']

    def test_atomic_write_replaces(self, tmp_path):
        """Test that an existing file is replaced."""
        path = tmp_path / 'out.json'
        path.write_bytes(b'old')
        util.atomic_write(str(path), b'new')
        assert path.read_bytes() == b'new'

    def test_atomic_write_failure(self, tmp_path):
        """Test that a failed write leaves the destination untouched and cleans up."""
        path = tmp_path / 'out.csv'
        path.write_text('original')

        with patch('creditvar.util.os.replace', side_effect=OSError("disk full")):
            with pytest.raises(OSError, match="disk full"):
                util.atomic_write(str(path), 'replacement')

        assert path.read_text() == 'original'
        assert os.listdir(str(tmp_path)) == ['out.csv']

    def test_atomic_write_missing_directory(self, tmp_path):
        """Test that writing into a missing directory raises OSError."""
        with pytest.raises(OSError):
            util.atomic_write(str(tmp_path / 'missing' / 'out.csv'), 'data')
