# -*- coding: utf-8 -*-
#
# chemoclust documentation build configuration file.
#
# All configuration values have a default; values that are commented out
# serve to show the default.

import sys, os

# Make the package importable for autodoc without installing it.
sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest',
              'sphinx.ext.intersphinx', 'sphinx.ext.coverage',
              'sphinx.ext.mathjax', 'sphinx.ext.autosummary',
              'sphinx.ext.viewcode', 'numpydoc']

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'chemoclust'
copyright = u'chemoclust developers'

version = '0.1'
release = '0.1'

exclude_patterns = []

pygments_style = 'sphinx'

numpydoc_show_class_members = False

intersphinx_mapping = {
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}

# -- Options for HTML output ---------------------------------------------------

html_theme = 'alabaster'

html_static_path = []

htmlhelp_basename = 'chemoclustdoc'

# -- Options for LaTeX output --------------------------------------------------

latex_elements = {
}

latex_documents = [
  ('index', 'chemoclust.tex', u'chemoclust Documentation',
   u'chemoclust developers', 'manual'),
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'chemoclust', u'chemoclust Documentation',
     [u'chemoclust developers'], 1)
]
