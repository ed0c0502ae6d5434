"""Static HTML reports with inline SVG depictions."""

from validmol.report.depict import compute_layout, depict_molecule
from validmol.report.html import ReportDocument, render_candidate, render_report

__all__ = ["ReportDocument", "compute_layout", "depict_molecule", "render_candidate", "render_report"]
