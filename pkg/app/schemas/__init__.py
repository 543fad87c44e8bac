__all__ = ["material", "kpoint", "structure", "reports", "fit", "manifest"]
