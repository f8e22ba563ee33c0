"""Batch figure generation for mmbl solver outputs; reads only the
versioned plain-text formats (snapshots, order tables, certificates)."""

from .figures import (plot_contraction, plot_convergence, plot_margins,
                      plot_profiles)
from .readers import (SchemaError, read_certificate, read_order_table,
                      read_snapshot)

__version__ = "0.1.0"
