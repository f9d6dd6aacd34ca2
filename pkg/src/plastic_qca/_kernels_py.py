"""Pure NumPy gate-application kernel, used when the compiled extension is missing."""


def apply_local(psi, out, bases, offsets, rows, cols, vals):
    """``out = (I ⊗ local) psi`` for a local matrix given as row-major triplets."""
    if psi.shape[0] != out.shape[0]:
        raise ValueError("input and output lengths differ")
    out[:] = 0
    for r, c, v in zip(rows, cols, vals):
        out[bases + offsets[r]] += v * psi[bases + offsets[c]]
    return out
