"""Exact linear algebra over the prime fields F_2, F_3, F_5 and F_7.

All matrices here are small and dense, so plain Python arithmetic suffices.
Over F_2 a row is stored as a Python int used as a bitmask (bit j is the
entry in column j) and elimination is XOR; over an odd prime a row is a
tuple of residues.  Pivot searches scan left to right and top to bottom, so
every routine is deterministic and results are reproducible byte for byte.

A matrix of shape (nrows, ncols) represents a linear map F_p^ncols ->
F_p^nrows acting on column vectors.  Vectors are plain tuples of ints.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

SUPPORTED_PRIMES = (2, 3, 5, 7)


def _check_prime(p: int) -> None:
    if p not in SUPPORTED_PRIMES:
        raise ValueError(f"unsupported prime {p}, expected one of {SUPPORTED_PRIMES}")


def _to_mask(vec: Sequence[int]) -> int:
    m = 0
    for j, x in enumerate(vec):
        if x & 1:
            m |= 1 << j
    return m


def _from_mask(mask: int, n: int) -> tuple:
    return tuple((mask >> j) & 1 for j in range(n))


class FpMatrix:
    """An immutable matrix over F_p.

    Rows passed to the constructor may hold arbitrary int representatives;
    they are reduced mod p on entry.
    """

    __slots__ = ("p", "nrows", "ncols", "_rows", "_rref", "_solver_cache")

    def __init__(self, p: int, rows: Iterable[Sequence[int]], ncols: Optional[int] = None):
        _check_prime(p)
        entry_rows = [tuple(x % p for x in row) for row in rows]
        if entry_rows:
            widths = {len(r) for r in entry_rows}
            if len(widths) != 1:
                raise ValueError("rows of unequal length")
            width = widths.pop()
            if ncols is not None and ncols != width:
                raise ValueError(f"ncols={ncols} but rows have length {width}")
            ncols = width
        elif ncols is None:
            ncols = 0
        self.p = p
        self.nrows = len(entry_rows)
        self.ncols = ncols
        if p == 2:
            self._rows = tuple(_to_mask(r) for r in entry_rows)
        else:
            self._rows = tuple(entry_rows)
        self._rref = None
        self._solver_cache = None

    # -- construction helpers ------------------------------------------------

    @classmethod
    def zeros(cls, p: int, nrows: int, ncols: int) -> "FpMatrix":
        return cls(p, [[0] * ncols for _ in range(nrows)], ncols=ncols)

    @classmethod
    def identity(cls, p: int, n: int) -> "FpMatrix":
        return cls(p, [[int(i == j) for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def from_columns(cls, p: int, columns: Sequence[Sequence[int]], nrows: int) -> "FpMatrix":
        """Assemble a matrix whose k-th column is columns[k]."""
        for col in columns:
            if len(col) != nrows:
                raise ValueError("column of wrong length")
        rows = [[col[i] for col in columns] for i in range(nrows)]
        return cls(p, rows, ncols=len(columns))

    # -- entry access --------------------------------------------------------

    def entry(self, i: int, j: int) -> int:
        if self.p == 2:
            return (self._rows[i] >> j) & 1
        return self._rows[i][j]

    def row(self, i: int) -> tuple:
        if self.p == 2:
            return _from_mask(self._rows[i], self.ncols)
        return self._rows[i]

    def column(self, j: int) -> tuple:
        return tuple(self.entry(i, j) for i in range(self.nrows))

    def rows(self) -> list:
        return [self.row(i) for i in range(self.nrows)]

    def is_zero(self) -> bool:
        if self.p == 2:
            return not any(self._rows)
        return all(not any(r) for r in self._rows)

    # -- arithmetic ----------------------------------------------------------

    def mul_vec(self, vec: Sequence[int]) -> tuple:
        if len(vec) != self.ncols:
            raise ValueError(f"vector length {len(vec)}, expected {self.ncols}")
        p = self.p
        if p == 2:
            vb = _to_mask(vec)
            return tuple((r & vb).bit_count() & 1 for r in self._rows)
        return tuple(sum(a * b for a, b in zip(row, vec)) % p for row in self._rows)

    def __matmul__(self, other: "FpMatrix") -> "FpMatrix":
        if self.p != other.p or self.ncols != other.nrows:
            raise ValueError("shape or prime mismatch in matrix product")
        cols = [self.mul_vec(other.column(k)) for k in range(other.ncols)]
        return FpMatrix.from_columns(self.p, cols, self.nrows)

    def __add__(self, other: "FpMatrix") -> "FpMatrix":
        if self.p != other.p or self.nrows != other.nrows or self.ncols != other.ncols:
            raise ValueError("shape or prime mismatch in matrix sum")
        if self.p == 2:
            rows = [a ^ b for a, b in zip(self._rows, other._rows)]
            return FpMatrix(self.p, [_from_mask(r, self.ncols) for r in rows], ncols=self.ncols)
        rows = [
            [(a + b) % self.p for a, b in zip(ra, rb)]
            for ra, rb in zip(self._rows, other._rows)
        ]
        return FpMatrix(self.p, rows, ncols=self.ncols)

    def scale(self, c: int) -> "FpMatrix":
        c %= self.p
        return FpMatrix(self.p, [[c * x for x in self.row(i)] for i in range(self.nrows)],
                        ncols=self.ncols)

    def transpose(self) -> "FpMatrix":
        return FpMatrix(self.p, [self.column(j) for j in range(self.ncols)], ncols=self.nrows)

    def submatrix(self, row_indices: Sequence[int], col_indices: Sequence[int]) -> "FpMatrix":
        rows = [[self.entry(i, j) for j in col_indices] for i in row_indices]
        return FpMatrix(self.p, rows, ncols=len(col_indices))

    # -- elimination ---------------------------------------------------------

    def rref(self):
        """Reduced row echelon form; returns (matrix, pivot column tuple)."""
        if self._rref is None:
            if self.p == 2:
                self._rref = self._rref2()
            else:
                self._rref = self._rrefp()
        return self._rref

    def _rref2(self):
        rows = list(self._rows)
        pivots = []
        r = 0
        for c in range(self.ncols):
            piv = next((i for i in range(r, self.nrows) if (rows[i] >> c) & 1), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            for i in range(self.nrows):
                if i != r and (rows[i] >> c) & 1:
                    rows[i] ^= rows[r]
            pivots.append(c)
            r += 1
            if r == self.nrows:
                break
        out = FpMatrix(self.p, [], ncols=self.ncols)
        out.nrows = self.nrows
        out._rows = tuple(rows)
        return out, tuple(pivots)

    def _rrefp(self):
        p = self.p
        rows = [list(row) for row in self._rows]
        pivots = []
        r = 0
        for c in range(self.ncols):
            piv = next((i for i in range(r, self.nrows) if rows[i][c]), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            inv = pow(rows[r][c], p - 2, p)
            rows[r] = [(x * inv) % p for x in rows[r]]
            for i in range(self.nrows):
                if i != r and rows[i][c]:
                    f = rows[i][c]
                    rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
            pivots.append(c)
            r += 1
            if r == self.nrows:
                break
        return FpMatrix(p, rows, ncols=self.ncols), tuple(pivots)

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel_basis(self) -> list:
        """Basis of the null space, one vector per free column, ascending."""
        R, pivots = self.rref()
        pivot_set = set(pivots)
        p = self.p
        basis = []
        for f in range(self.ncols):
            if f in pivot_set:
                continue
            v = [0] * self.ncols
            v[f] = 1
            for j, c in enumerate(pivots):
                v[c] = (-R.entry(j, f)) % p
            basis.append(tuple(v))
        return basis

    def solver(self) -> "FpSolver":
        if self._solver_cache is None:
            self._solver_cache = FpSolver(self)
        return self._solver_cache

    def preimage(self, vec: Sequence[int]) -> Optional[tuple]:
        """Some x with M x = vec, or None if vec is not in the column space."""
        return self.solver().solve(vec)

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return (self.p == other.p and self.nrows == other.nrows
                and self.ncols == other.ncols and self._rows == other._rows)

    def __hash__(self):
        return hash((self.p, self.nrows, self.ncols, self._rows))

    def __repr__(self):
        return f"FpMatrix(p={self.p}, {self.nrows}x{self.ncols})"


class FpSolver:
    """Repeated-solve helper for a fixed matrix M.

    Precomputes an invertible row transform T with T M in reduced echelon
    form; each solve is then a matrix-vector product and a consistency check.
    """

    def __init__(self, matrix: FpMatrix):
        self.matrix = matrix
        p = matrix.p
        m, n = matrix.nrows, matrix.ncols
        if p == 2:
            # Augment each row with an identity block above bit n.
            aug = [matrix._rows[i] | (1 << (n + i)) for i in range(m)]
            pivots = []
            r = 0
            for c in range(n):
                piv = next((i for i in range(r, m) if (aug[i] >> c) & 1), None)
                if piv is None:
                    continue
                aug[r], aug[piv] = aug[piv], aug[r]
                for i in range(m):
                    if i != r and (aug[i] >> c) & 1:
                        aug[i] ^= aug[r]
                pivots.append(c)
                r += 1
                if r == m:
                    break
            self._transform = [row >> n for row in aug]
        else:
            aug = [list(matrix._rows[i]) + [int(i == j) for j in range(m)] for i in range(m)]
            pivots = []
            r = 0
            for c in range(n):
                piv = next((i for i in range(r, m) if aug[i][c]), None)
                if piv is None:
                    continue
                aug[r], aug[piv] = aug[piv], aug[r]
                inv = pow(aug[r][c], p - 2, p)
                aug[r] = [(x * inv) % p for x in aug[r]]
                for i in range(m):
                    if i != r and aug[i][c]:
                        f = aug[i][c]
                        aug[i] = [(x - f * y) % p for x, y in zip(aug[i], aug[r])]
                pivots.append(c)
                r += 1
                if r == m:
                    break
            self._transform = [tuple(row[n:]) for row in aug]
        self._pivots = tuple(pivots)

    def solve(self, vec: Sequence[int]) -> Optional[tuple]:
        """A particular solution of M x = vec with free variables set to 0."""
        M = self.matrix
        p = M.p
        if len(vec) != M.nrows:
            raise ValueError(f"vector length {len(vec)}, expected {M.nrows}")
        if p == 2:
            vb = _to_mask(vec)
            u = [(t & vb).bit_count() & 1 for t in self._transform]
        else:
            u = [sum(a * b for a, b in zip(t, vec)) % p for t in self._transform]
        rank = len(self._pivots)
        if any(u[rank:]):
            return None
        x = [0] * M.ncols
        for j, c in enumerate(self._pivots):
            x[c] = u[j]
        return tuple(x)


class Echelon:
    """A growing subspace of F_p^n kept in reduced row echelon form.

    reduce() returns the canonical residue of a vector modulo the current
    span, so two vectors are congruent mod the span iff their residues are
    equal.  add() inserts a vector when it enlarges the span.
    """

    def __init__(self, p: int, ncols: int):
        _check_prime(p)
        self.p = p
        self.ncols = ncols
        self._rows = []    # mutually reduced rows with unit leading entries
        self._pivots = []  # pivot column of each row, in insertion order

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, vec: Sequence[int]) -> tuple:
        p = self.p
        if len(vec) != self.ncols:
            raise ValueError(f"vector length {len(vec)}, expected {self.ncols}")
        if p == 2:
            # Rows are mutually reduced, so each row clears exactly its own
            # pivot bit and one pass in any order is enough.
            r = _to_mask(vec)
            for row, c in zip(self._rows, self._pivots):
                if (r >> c) & 1:
                    r ^= row
            return _from_mask(r, self.ncols)
        r = [x % p for x in vec]
        for row, c in zip(self._rows, self._pivots):
            f = r[c]
            if f:
                r = [(x - f * y) % p for x, y in zip(r, row)]
        return tuple(r)

    def contains(self, vec: Sequence[int]) -> bool:
        return not any(self.reduce(vec))

    def add(self, vec: Sequence[int]) -> bool:
        """Insert vec if independent of the span; returns True if rank grew."""
        p = self.p
        res = self.reduce(vec)
        if not any(res):
            return False
        c = next(j for j, x in enumerate(res) if x)
        if p == 2:
            new = _to_mask(res)
            for i, row in enumerate(self._rows):
                if (row >> c) & 1:
                    self._rows[i] = row ^ new
        else:
            inv = pow(res[c], p - 2, p)
            new = tuple((x * inv) % p for x in res)
            for i, row in enumerate(self._rows):
                f = row[c]
                if f:
                    self._rows[i] = tuple((x - f * y) % p for x, y in zip(row, new))
        self._rows.append(new)
        self._pivots.append(c)
        return True
