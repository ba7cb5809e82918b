DEFAULTS = {
    "mode": "exact",               # "exact" (Fraction) | "float" (binary64)
    "tolerance": 1e-9,             # normalization / comparison tolerance in float mode
    "log_base": 2,                 # entropies in bits
    "assignment_cap": 2 ** 20,     # max number of global deterministic assignments
    "snap_denominator": 10 ** 6,   # float tables are snapped to this grid before the LP
    "bound_tolerance": 1e-10,      # H(M) >= I(C;O|lambda) - bound_tolerance
    "saturation_tolerance": 1e-9,  # |H(M) - I(C;O|lambda)| <= saturation_tolerance
    "output_format": "text",       # "text" | "json"
    "seed": 20240917,              # property-suite seed (CONTEXTCOST_SEED overrides it)
    "significant_digits": 12,      # floats in JSON reports
}

MODES = ("exact", "float")
OUTPUT_FORMATS = ("text", "json")
