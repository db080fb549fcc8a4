"""Independent reference implementations used to cross-check the package.

These deliberately avoid the package's own shortest-path code: the oracle
is a dense Floyd-Warshall over the same latency metric (per-link latency
plus a router pipeline per traversed router, both endpoints included).
"""


def floyd_warshall_latency(topo, router_delay=3):
    n = topo.n_nodes
    inf = float("inf")
    dist = [[inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for l in topo.links:
        w = l.latency_clk + router_delay
        if w < dist[l.src][l.dst]:
            dist[l.src][l.dst] = w
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == inf:
                continue
            di = dist[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return [
        [0 if i == j else d + router_delay for j, d in enumerate(row)]
        for i, row in enumerate(dist)
    ]
