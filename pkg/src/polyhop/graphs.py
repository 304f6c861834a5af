"""Small graph utilities: BFS distances, diameter, geodesic counting, DAG longest path.

Kept dependency-free and exact (integer arithmetic) since several search
metrics and verification reports are built on these counts.
"""

from collections import deque

from .errors import Disconnected


def bfs_distances(adjacency, source):
    """Dict of shortest-path edge counts from source. adjacency: node -> iterable of nodes."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def bfs_geodesic_counts(adjacency, source):
    """Distances and exact counts of shortest paths from source.

    Standard BFS recurrence: a shortest path to v extends a shortest path to
    any predecessor u with dist(u) + 1 == dist(v).
    """
    dist = {source: 0}
    count = {source: 1}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                count[v] = count[u]
                queue.append(v)
            elif dist[v] == dist[u] + 1:
                count[v] += count[u]
    return dist, count


def is_connected(adjacency):
    nodes = list(adjacency)
    if not nodes:
        return True
    return len(bfs_distances(adjacency, nodes[0])) == len(nodes)


def graph_diameter(adjacency):
    """Max over node pairs of shortest-path length. Raises Disconnected."""
    nodes = list(adjacency)
    if not nodes:
        return 0
    best = 0
    for s in nodes:
        dist = bfs_distances(adjacency, s)
        if len(dist) != len(nodes):
            raise Disconnected("graph is not connected")
        best = max(best, max(dist.values()))
    return best


def walk_counts(adjacency, source, target, length):
    """Number of walks of a given length from source to target (exact ints)."""
    current = {source: 1}
    for _ in range(length):
        nxt = {}
        for u, c in current.items():
            for v in adjacency[u]:
                nxt[v] = nxt.get(v, 0) + c
        current = nxt
    return current.get(target, 0)


def longest_path_dag(order, successors):
    """Longest path (edge count) in a DAG given a topological order.

    order: nodes in topological order; successors: node -> iterable of nodes.
    """
    best = {u: 0 for u in order}
    for u in reversed(order):
        for v in successors[u]:
            if best[v] + 1 > best[u]:
                best[u] = best[v] + 1
    return max(best.values()) if best else 0
