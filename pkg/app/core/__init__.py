__all__ = ["config", "constants", "errors", "cache_utils", "json_io"]
