from .export import ExportConfig, export

__version__ = "0.1.0"
