"""creditvar utility functions.

This module implements the small helpers shared by the engine and the command line: resolving
the worker count, partitioning work into fixed chunks, running chunk tasks on a thread pool and
writing output files atomically.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from tempfile import NamedTemporaryFile

import psutil

# Fixed partition size for node-parallel work. Chunk boundaries never depend on the worker
# count, so reductions over chunk results are bit-identical for any number of workers.
NODE_CHUNK_SIZE = 2048


def resolve_workers(threads=None):
    """Resolve the number of worker threads to use.

    :param threads: requested cap on workers, or None to use all logical CPUs
    :return: a positive worker count
    """
    available = psutil.cpu_count(logical=True) or 1
    if threads is None:
        return available
    return max(1, min(int(threads), available))


def chunk_ranges(size, chunk_size=NODE_CHUNK_SIZE):
    """Partition range(size) into consecutive (start, stop) pairs of at most chunk_size.

    :param size: total number of items
    :param chunk_size: maximum number of items per chunk
    :return: list of (start, stop) tuples covering range(size) in order
    """
    return [(start, min(start + chunk_size, size)) for start in range(0, size, chunk_size)]


def run_in_executor(func, tasks, workers=1):
    """Run a function over a list of tasks, in a thread pool if more than one worker is given.

    Results are returned in task order regardless of completion order. numpy releases the GIL
    in its array kernels, so threads give real parallelism for the engine's chunk work.

    :param func: callable applied to each task
    :param tasks: list of task arguments
    :param workers: number of worker threads
    :return: list of results in task order
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]

    logging.debug('Running %d tasks on %d worker threads', len(tasks), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, tasks))


def atomic_write(path, data):
    """Write data to a file atomically via a temporary file and rename.

    The temporary file is created in the destination directory so the final rename stays on
    one filesystem. On failure the temporary file is removed and the destination is untouched.

    :param path: destination file path
    :param data: str (written as UTF-8) or bytes
    """
    if isinstance(data, str):
        data = data.encode('utf-8')

    directory = os.path.dirname(os.path.abspath(path))
    temp_file = NamedTemporaryFile(mode='wb', dir=directory, prefix='.creditvar-', delete=False)
    try:
        with temp_file:
            temp_file.write(data)
            temp_file.flush()
            os.fsync(temp_file.fileno())
        os.replace(temp_file.name, path)
    except BaseException:
        try:
            os.unlink(temp_file.name)
        except OSError:
            pass
        raise

    logging.debug('Wrote %d bytes to %s', len(data), path)
