"""Dual kernel implementations (numba @njit and vectorized numpy).

Import the active module through :func:`lfdrender.backend.kernels` rather than
importing cpu_numba/cpu_numpy directly; both expose the same functions with
the same array signatures and produce bit-identical results.
"""
