from .fit_files import FitFileRepository, fit_to_record, mixture_to_record
from .samples import SampleRepository
from .tables import StudyRepository, render_table, write_curves, write_report

__all__ = [
    "SampleRepository",
    "FitFileRepository",
    "StudyRepository",
    "fit_to_record",
    "mixture_to_record",
    "render_table",
    "write_curves",
    "write_report",
]
