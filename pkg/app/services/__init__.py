__all__ = [
    "materials",
    "eigen",
    "bulk_hamiltonian",
    "band_properties",
    "constraints",
    "superlattice",
    "alloy_qw",
    "cost",
    "genetic",
    "fitting",
    "kpath",
    "manifest",
    "references",
]
