# Sphinx configuration for the psitcalc API documentation.

import os
import sys

sys.path.insert(0, os.path.abspath("../.."))

project = "psitcalc"
extensions = ["sphinx.ext.autodoc", "sphinx.ext.napoleon"]
autodoc_member_order = "bysource"
templates_path = ["_templates"]
exclude_patterns = []
html_theme = "sphinx_rtd_theme"
html_static_path = ["_static"]
