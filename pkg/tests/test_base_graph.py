import numpy as np
import pytest

from liftchroma.base_graph import (
    BaseGraph,
    adjacency_spectrum,
    format_graph_text,
    make_complete_graph,
    make_cycle_graph,
    make_petersen_graph,
    parse_graph_text,
    resolve_graph_arg,
    validate,
)
from liftchroma.errors import InvalidGraphError


def test_complete_graph_shapes():
    g = make_complete_graph(4)
    assert g.num_vertices == 4
    assert g.num_edges == 6
    assert validate(g) == 3
    g3 = make_complete_graph(3)
    assert (g3.num_vertices, g3.num_edges, validate(g3)) == (3, 3, 2)


def test_complete_graph_rejects_small():
    with pytest.raises(ValueError):
        make_complete_graph(2)


def test_complete_graph_orientation_lexicographic():
    g = make_complete_graph(4)
    assert g.edges == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def test_validate_loop():
    g = BaseGraph(2, ((0, 0), (0, 1), (1, 0), (1, 1)))
    with pytest.raises(InvalidGraphError, match="loop"):
        validate(g)


def test_validate_degree_mismatch():
    path = BaseGraph(3, ((0, 1), (1, 2)))
    with pytest.raises(InvalidGraphError, match="degree mismatch"):
        validate(path)


def test_validate_too_few_vertices():
    with pytest.raises(InvalidGraphError, match="too few"):
        validate(BaseGraph(1, ()))


def test_validate_degree_below_two():
    single_matching = BaseGraph(2, ((0, 1),))
    with pytest.raises(InvalidGraphError, match="degree 1 < 2"):
        validate(single_matching)


def test_spectrum_complete_graphs(k3, k4):
    s4 = adjacency_spectrum(k4)
    assert np.allclose(s4.eigenvalues, [3, -1, -1, -1], atol=1e-9)
    s3 = adjacency_spectrum(k3)
    assert np.allclose(s3.eigenvalues, [2, -1, -1], atol=1e-9)


def test_spectrum_doubled_triangle(doubled_triangle):
    # adjacency is 2(J - I) on 3 vertices; analytic eigenvalues 4, -2, -2
    s = adjacency_spectrum(doubled_triangle)
    assert s.degree == 4
    assert np.allclose(s.eigenvalues, [4, -2, -2], atol=1e-9)


def test_spectrum_petersen(petersen):
    s = adjacency_spectrum(petersen)
    assert np.allclose(s.eigenvalues, [3] + [1] * 5 + [-2] * 4, atol=1e-9)


@pytest.mark.parametrize("maker", [lambda: make_complete_graph(5), make_petersen_graph, lambda: make_cycle_graph(7)])
def test_spectrum_invariants(maker):
    g = maker()
    s = adjacency_spectrum(g)
    assert abs(sum(s.eigenvalues)) < 1e-9
    assert abs(s.eigenvalues[0] - s.degree) < 1e-9


def test_spectrum_relabeling_invariance(petersen):
    rng = np.random.default_rng(5)
    base = adjacency_spectrum(petersen).eigenvalues
    for _ in range(5):
        perm = rng.permutation(petersen.num_vertices)
        relabeled = BaseGraph(
            petersen.num_vertices,
            tuple((int(perm[t]), int(perm[h])) for t, h in petersen.edges),
        )
        assert np.allclose(adjacency_spectrum(relabeled).eigenvalues, base, atol=1e-9)


def test_text_format_roundtrip(k4):
    text = format_graph_text(k4)
    assert text.splitlines()[0] == "4 6"
    parsed = parse_graph_text(text)
    assert parsed == k4


def test_resolve_graph_arg_shorthand_and_file(tmp_path, k5):
    assert resolve_graph_arg("K5") == k5
    path = tmp_path / "g.txt"
    path.write_text(format_graph_text(k5))
    assert resolve_graph_arg(str(path)) == k5
    with pytest.raises(ValueError):
        resolve_graph_arg("no-such-thing")
