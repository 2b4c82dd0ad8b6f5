"""The f-component of a generalised Diestel-Leader graph.

With T1 supercritical and T2 a path the component of the root has mean
offspring m1/m2, and the transport only balances once mass coming up from
the generation below is reweighted by m2/m1.

    python demos/diestel_leader.py
"""

from eftsim.dl_graph import DLPairSampler, dl_mtp_test, dl_offspring_check, sample_dl_windows
from eftsim.samplers import OffspringDistribution

O = OffspringDistribution.parse
w = sample_dl_windows("1:1/2,3:1/2", "1:1", 3, 1, seed=0)[0]
print(f"window with {w.n} pairs:", w.check_identities())
print("\n".join(w.export().splitlines()[:5]))

s = DLPairSampler(O("1:1/2,3:1/2"), O("1:1"))
for r in dl_offspring_check(s, 100_000, seed=1)[:3]:
    print(r.summary())
for weighted in (True, False):
    print(dl_mtp_test(s, weighted, "f_parent", 100_000, seed=2).summary())
