"""Dense linear-algebra kernels: spectra, pseudoinverse, subspace bases, projections.

Everything operates on plain float64 numpy arrays. Matrices serialize to/from
JSON as {"rows": n, "cols": p, "data": [row-major reals]}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# eig_complex is a desk-scale oracle, not a production eigensolver.
MAX_ORACLE_DIM = 64


class NotSymmetricError(ValueError):
    pass


class NoConvergenceError(RuntimeError):
    pass


class DimensionTooLargeError(ValueError):
    pass


class NotComplementaryError(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1) if m.size else m.reshape(0, 0)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def as_vector(v, length: int | None = None) -> np.ndarray:
    out = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(out)):
        raise ValueError("vector entries must be finite")
    if length is not None and out.size != length:
        raise ValueError(f"expected vector of length {length}, got {out.size}")
    return out


def matrix_to_json(a: np.ndarray) -> dict:
    m = as_matrix(a)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]),
            "data": [float(x) for x in m.reshape(-1)]}


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = np.asarray(obj["data"], dtype=float)
    if data.size != rows * cols:
        raise ValueError(f"matrix data length {data.size} != {rows}x{cols}")
    return as_matrix(data.reshape(rows, cols))


def default_rank_tol(a: np.ndarray) -> float:
    """Relative singular-value cutoff: max(rows, cols) * machine epsilon."""
    return max(a.shape) * np.finfo(float).eps if a.size else np.finfo(float).eps


@dataclass
class SubspaceBasis:
    """Columns of `vectors` span a subspace of R^ambient_dim."""

    ambient_dim: int
    vectors: np.ndarray  # shape (ambient_dim, dim)
    orthonormal: bool = False

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != self.ambient_dim:
            raise ValueError("basis vectors must be columns of an (ambient_dim, k) array")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def orthonormalized(self) -> "SubspaceBasis":
        if self.orthonormal or self.dim == 0:
            return SubspaceBasis(self.ambient_dim, self.vectors, orthonormal=True)
        q, r = np.linalg.qr(self.vectors)
        keep = np.abs(np.diag(r)) > default_rank_tol(self.vectors) * max(
            1.0, np.abs(np.diag(r)).max())
        return SubspaceBasis(self.ambient_dim, q[:, keep], orthonormal=True)


def span(vectors, ambient_dim: int | None = None) -> SubspaceBasis:
    """Subspace spanned by the given (row-listed) vectors."""
    arr = np.atleast_2d(np.asarray(vectors, dtype=float))
    basis = SubspaceBasis(arr.shape[1] if ambient_dim is None else ambient_dim, arr.T)
    return basis.orthonormalized()


def full_space(n: int) -> SubspaceBasis:
    return SubspaceBasis(n, np.eye(n), orthonormal=True)


@dataclass
class ComplexScalarSet:
    """Distinct complex scalars with algebraic multiplicities."""

    values: np.ndarray        # complex, pairwise distinct up to the clustering tol
    multiplicities: np.ndarray  # positive ints, aligned with values

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    def as_multiset(self) -> np.ndarray:
        """Values repeated according to multiplicity, sorted by (re, im)."""
        out = np.repeat(self.values, self.multiplicities)
        order = np.lexsort((out.imag, out.real))
        return out[order]

    def max_modulus(self, exclude: complex | None = None, tol: float = 1e-9) -> float:
        mods = [abs(v) for v in self.values
                if exclude is None or abs(v - exclude) > tol]
        return max(mods, default=0.0)


def cluster_scalars(values, tol: float) -> ComplexScalarSet:
    """Group near-equal scalars (union-find on pairwise distance <= tol)."""
    vals = np.asarray(values, dtype=complex).reshape(-1)
    n = vals.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    centers, mults = [], []
    for members in groups.values():
        centers.append(vals[members].mean())
        mults.append(len(members))
    centers = np.asarray(centers)
    mults = np.asarray(mults, dtype=int)
    order = np.lexsort((centers.imag, centers.real))
    return ComplexScalarSet(centers[order], mults[order])


def _conjugate_symmetrize(s: ComplexScalarSet, tol: float) -> ComplexScalarSet:
    """Snap a spectrum of a real matrix onto exact conjugate pairs / reals."""
    vals = s.values.copy()
    used = np.zeros(len(vals), dtype=bool)
    for i in range(len(vals)):
        if used[i]:
            continue
        if abs(vals[i].imag) <= tol:
            vals[i] = complex(vals[i].real, 0.0)
            used[i] = True
            continue
        partner = None
        for j in range(len(vals)):
            if j != i and not used[j] and abs(vals[j] - vals[i].conjugate()) <= 2 * tol:
                partner = j
                break
        if partner is not None:
            z = 0.5 * (vals[i] + vals[partner].conjugate())
            vals[i], vals[partner] = z, z.conjugate()
            used[i] = used[partner] = True
        else:
            used[i] = True
    order = np.lexsort((vals.imag, vals.real))
    return ComplexScalarSet(vals[order], s.multiplicities[order])


def sym_eig(m, tol: float = 1e-10):
    """Full eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted descending and
    eigenvectors as matching orthonormal columns.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NotSymmetricError("matrix is not square")
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.linalg.norm(a - a.T) > tol * scale:
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    try:
        w, v = np.linalg.eigh(0.5 * (a + a.T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergenceError(str(exc)) from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def eig_complex(m, eig_tol: float = 1e-8) -> ComplexScalarSet:
    """All complex eigenvalues of a small real matrix, with multiplicities.

    Desk-scale oracle: dimension is capped at MAX_ORACLE_DIM. The result is
    conjugate-closed (input is real so the spectrum must be).
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("eig_complex needs a square matrix")
    if a.shape[0] > MAX_ORACLE_DIM:
        raise DimensionTooLargeError(
            f"dimension {a.shape[0]} exceeds oracle cap {MAX_ORACLE_DIM}")
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    scale = max(1.0, float(np.max(np.abs(vals), initial=0.0)))
    clustered = cluster_scalars(vals, eig_tol * scale)
    return _conjugate_symmetrize(clustered, eig_tol * scale)


def pinv(a, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse via SVD; singular values below rank_tol*s_max drop to 0."""
    m = as_matrix(a)
    if m.size == 0:
        return m.T.copy()
    if rank_tol is None:
        rank_tol = default_rank_tol(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    cutoff = rank_tol * (s[0] if s.size else 0.0)
    inv_s = np.where(s > cutoff, np.divide(1.0, s, where=s > cutoff), 0.0)
    return (vh.T * inv_s) @ u.T


def matrix_rank(a, rank_tol: float | None = None) -> int:
    m = as_matrix(a)
    if m.size == 0:
        return 0
    if rank_tol is None:
        rank_tol = default_rank_tol(m)
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > rank_tol * s[0]))


def kernel_basis(a, rank_tol: float | None = None) -> SubspaceBasis:
    """Orthonormal basis of the numerical null space of `a` (may be empty)."""
    m = as_matrix(a)
    cols = m.shape[1]
    if m.size == 0:
        return SubspaceBasis(cols, np.eye(cols), orthonormal=True)
    if rank_tol is None:
        rank_tol = default_rank_tol(m)
    _, s, vh = np.linalg.svd(m)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size else 0
    return SubspaceBasis(cols, vh[rank:].T.copy(), orthonormal=True)


def image_basis(a, rank_tol: float | None = None) -> SubspaceBasis:
    """Orthonormal basis of the column space of `a`."""
    m = as_matrix(a)
    rows = m.shape[0]
    if m.size == 0:
        return SubspaceBasis(rows, np.zeros((rows, 0)), orthonormal=True)
    if rank_tol is None:
        rank_tol = default_rank_tol(m)
    u, s, _ = np.linalg.svd(m)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size else 0
    return SubspaceBasis(rows, u[:, :rank].copy(), orthonormal=True)


def project(v, onto: SubspaceBasis, along: SubspaceBasis | None = None) -> np.ndarray:
    """Project `v` onto a subspace, orthogonally or along a complement.

    With `along` absent this is the orthogonal projection. With `along`
    present, `onto` and `along` must be complementary subspaces; the result is
    the component of v in `onto` when v is split as onto-part + along-part.
    """
    vec = as_vector(v, onto.ambient_dim)
    q_onto = onto.orthonormalized()
    if along is None:
        if q_onto.dim == 0:
            return np.zeros_like(vec)
        q = q_onto.vectors
        return q @ (q.T @ vec)
    if along.ambient_dim != onto.ambient_dim:
        raise ValueError("onto/along live in different ambient spaces")
    q_along = along.orthonormalized()
    if q_onto.dim + q_along.dim != onto.ambient_dim:
        raise NotComplementaryError(
            f"dim(onto)={q_onto.dim} + dim(along)={q_along.dim} != {onto.ambient_dim}")
    stacked = np.hstack([q_onto.vectors, q_along.vectors])
    smin = np.linalg.svd(stacked, compute_uv=False)[-1] if stacked.size else 0.0
    if smin <= 1e-8:
        raise NotComplementaryError(
            f"subspaces are numerically degenerate (sigma_min={smin:.3e})")
    coeffs = np.linalg.solve(stacked, vec)
    return q_onto.vectors @ coeffs[:q_onto.dim]


def principal_angles(b1: SubspaceBasis, b2: SubspaceBasis) -> np.ndarray:
    """Principal angles between two subspaces (radians, ascending).

    Cosines alone lose accuracy below sqrt(eps); pairing them with the sines
    of the residual keeps tiny angles tiny.
    """
    q1, q2 = b1.orthonormalized(), b2.orthonormalized()
    if q1.dim == 0 or q2.dim == 0:
        return np.zeros(0)
    gram = q1.vectors.T @ q2.vectors
    cosines = np.sort(np.clip(np.linalg.svd(gram, compute_uv=False), 0.0, 1.0))
    resid = q2.vectors - q1.vectors @ gram
    sines = np.sort(np.clip(np.linalg.svd(resid, compute_uv=False), 0.0, 1.0))[::-1]
    k = min(len(sines), len(cosines))
    return np.sort(np.arctan2(sines[:k], cosines[:k]))


def subspaces_equal(b1: SubspaceBasis, b2: SubspaceBasis, tol: float = 1e-8) -> bool:
    if b1.orthonormalized().dim != b2.orthonormalized().dim:
        return False
    ang = principal_angles(b1, b2)
    return bool(ang.size == 0 or ang.max() < tol)
