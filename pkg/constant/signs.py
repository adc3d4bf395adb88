# Order of the sign toggles carried by a vertex model
SIGN_NAMES = (
    "assoc",
    "dictionary",
    "comm",
    "pair",
    "assoc3",
    "diff",
)

# The only assignment under which every truncated axiom and every algebroid identity holds
CONSISTENT_SIGNS = (1, 1, 1, -1, -1, -1)

# Signs as printed next to the associator and dictionary formulas
PRINTED_SIGNS = (-1, -1, 1, -1, -1, -1)
