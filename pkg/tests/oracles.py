"""Independent reference constructions used by the tests.

Nothing here goes through ``dqdent.fock`` sign bookkeeping: operators are
Jordan-Wigner Kronecker products on the full ``4**L`` space, and the dimer
results come from closed-form two-level algebra.
"""
import math
from functools import reduce

import numpy as np

_Z = np.diag([1.0, -1.0])
_I = np.eye(2)
# single-mode annihilator in the (empty, filled) basis
_A = np.array([[0.0, 1.0], [0.0, 0.0]])


def jw_annihilator(p, n_orb):
    """``c_p`` on ``n_orb`` modes; factor 0 is the most significant bit."""
    factors = [_Z] * p + [_A] + [_I] * (n_orb - p - 1)
    return reduce(np.kron, factors)


def kron_index(mask, n_orb):
    """Position of the bitmask state in the Kronecker ordering."""
    return sum(((mask >> p) & 1) << (n_orb - 1 - p) for p in range(n_orb))


def brute_force_hamiltonian(spec):
    """Full-space Hamiltonian of a ModelSpec built from operator algebra."""
    from dqdent.model import bonds

    L = spec.n_sites
    n_orb = 2 * L
    c = [jw_annihilator(p, n_orb) for p in range(n_orb)]
    cd = [m.T for m in c]
    n = [cd[p] @ c[p] for p in range(n_orb)]
    H = np.zeros((4**L, 4**L))
    for i, j, amp in bonds(spec):
        for s in (0, 1):
            a, b = 2 * i + s, 2 * j + s
            H -= amp * (cd[a] @ c[b] + cd[b] @ c[a])
    for site in (spec.site_a, spec.site_b):
        up, dn = n[2 * site], n[2 * site + 1]
        H += spec.dot_level * (up + dn) + spec.U * up @ dn + 0.5 * spec.B * (up - dn)
    return H


def full_space_labels(L):
    """``(N, 2 S_z)`` of each Kronecker basis state."""
    n_orb = 2 * L
    out = []
    for k in range(4**L):
        bits = [(k >> (n_orb - 1 - p)) & 1 for p in range(n_orb)]
        up = sum(bits[0::2])
        dn = sum(bits[1::2])
        out.append((up + dn, up - dn))
    return out


def project_to_sector(H_full, basis):
    n_orb = 2 * basis.L
    idx = [kron_index(int(m), n_orb) for m in basis.states]
    return H_full[np.ix_(idx, idx)]


def dimer_two_level(t, U):
    """Ground state of the half-filled Hubbard dimer in the
    (covalent singlet, ionic symmetric) basis: returns (E_rel, a2, b2)."""
    w, v = np.linalg.eigh(np.array([[0.0, -2 * t], [-2 * t, U]]))
    a2, b2 = v[0, 0] ** 2, v[1, 0] ** 2
    return w[0], a2, b2


def gibbs_singlet_triplet_concurrence(delta, T):
    """Concurrence of exp(-H/T) for a singlet below a triplet by ``delta``."""
    if T == 0:
        return 1.0
    x = 3 * math.exp(-delta / T)
    return max(0.0, (1 - x) / (1 + x))


def free_chain_ground_energy(n_sites, hop):
    """Grand-canonical (mu = 0) ground energy of a spinful open chain."""
    if n_sites == 0:
        return 0.0
    h = -hop * (np.eye(n_sites, k=1) + np.eye(n_sites, k=-1))
    eps = np.linalg.eigvalsh(h)
    return 2 * float(eps[eps < 0].sum())
