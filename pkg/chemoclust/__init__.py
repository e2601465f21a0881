# -*- coding: utf-8 -*-

"""Numerical workbench for one dimensional chemotactic clustering with a
stiff signal response."""

import logging

logging.getLogger(__name__).addHandler(logging.NullHandler())
