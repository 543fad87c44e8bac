__all__ = ["common", "bands", "props", "sl_gap", "fit", "qw_sweep", "evaluate"]
