"""Pure-numpy fallback for the jet hot kernels.

The compiled extension (tractorlab._kernels) implements the same two entry
points; this module is selected at import time when the extension is missing
or when TRACTORLAB_PURE=1.
"""

COMPILED = False


def jet_mul2(a, b, i_idx, j_idx, k_idx, scatter, out):
    """Truncated product of jet coefficient blocks.

    a, b, out: (B, NC) float64.  The M products a[:,i]*b[:,j] land on target
    coefficients through the (M, NC) 0/1 scatter matrix.
    """
    prod = a[:, i_idx] * b[:, j_idx]
    out += prod @ scatter
    return out


def jet_matmul4(a, b, i_idx, j_idx, k_idx, scatter, out):
    """Matrix product of jet-valued matrices: (B,r,k,NC) @ (B,k,c,NC)."""
    B, r, kdim, NC = a.shape
    c = b.shape[2]
    for k in range(kdim):
        ak = a[:, :, k, :][:, :, i_idx]          # (B, r, M)
        bk = b[:, k, :, :][:, :, j_idx]          # (B, c, M)
        prod = ak[:, :, None, :] * bk[:, None, :, :]
        out += (prod.reshape(-1, prod.shape[-1]) @ scatter).reshape(B, r, c, NC)
    return out
