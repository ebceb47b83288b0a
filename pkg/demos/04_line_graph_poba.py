"""How bad can behavioral equilibria get compared with a planner?

K defenders each own one node on a chain.  Every defender spends her own
share on her own incoming edge, while a planner pools the budget on the
first edge.  The ratio of true costs has a closed form and stays under
exp(B).
"""

import math

from bsgames import DynamicsConfig, find_equilibria, poba, social_optimum
from bsgames.instances import line_graph, line_graph_own_edge, line_graph_poba

print(f"{'K':>3} {'B':>4} {'PoBA':>12} {'closed form':>12} {'/exp(B)':>8}")
for K in (2, 5, 10, 30):
    for B in (1.0, 3.0, 5.0):
        s = line_graph(K, B)
        eqs = find_equilibria(s, DynamicsConfig(n_starts=0), starts=[line_graph_own_edge(s)])
        rep = poba(s, eqs, social_optimum(s))
        print(f"{K:>3} {B:>4g} {rep.poba:>12.6f} {line_graph_poba(K, B):>12.6f} "
              f"{rep.poba / math.exp(B):>8.4f}")
