import pytest

from incsp.model import align_prediction, parse_instance, prepare_for_build

# Worked micro-instance used across the suite: 3 vertices, 4 inserts,
# W=8, epsilon=1.0, source 0.  Exact distances per prefix are frozen in
# T1_ORACLE_ROWS (rows t=0..4, columns vertex 0..2).
T1_TEXT = """3 4 8 1.0 0
0 1 4
1 2 2
0 2 8
0 1 1
"""

INF = float("inf")

T1_ORACLE_ROWS = [
    [0, INF, INF],
    [0, 4, INF],
    [0, 4, 6],
    [0, 4, 6],
    [0, 1, 3],
]


@pytest.fixture
def t1():
    return parse_instance(T1_TEXT)


@pytest.fixture
def t1_padded(t1):
    return prepare_for_build(t1)


@pytest.fixture
def t1_edges(t1_padded):
    return list(t1_padded.sigma)


@pytest.fixture
def t1_permuted(t1_padded, t1_edges):
    """The swapped prediction [e2, e1, e3, e4], aligned and padded."""
    e = t1_edges
    return align_prediction([e[1], e[0], e[2], e[3]], t1_padded)


@pytest.fixture
def write_instance(tmp_path):
    def _write(text, name="inst.edges"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write
