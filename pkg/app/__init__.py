__version__ = "0.1.0"

__all__ = ["__version__", "core", "models", "schemas", "services", "cli"]
