# -*- coding: utf-8 -*-
#
# creditvar documentation build configuration file.

import sys
import os

# Document the package from the source tree
sys.path.insert(0, os.path.abspath('../src'))

from creditvar import __version__  # noqa: E402

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx'
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'creditvar'
copyright = u'creditvar developers'
author = u'creditvar developers'

# The short X.Y version.
version = '.'.join(__version__.split('.')[:2])
# The full version, including alpha/beta/rc tags.
release = __version__

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store', 'examples']
pygments_style = 'sphinx'
todo_include_todos = False

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'pandas': ('https://pandas.pydata.org/docs', None),
}

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'creditvardoc'

latex_documents = [
    (master_doc, 'creditvar.tex', u'creditvar Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'creditvar', u'creditvar Documentation', [author], 1)
]
