# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
conic_surfaces

Numerical toolkit for constant-curvature conic metrics on surfaces: cone-angle classification,
model metrics, indicial roots, mode spectra and uniformization through the Liouville equation.
"""

__version__ = "0.1.0"
