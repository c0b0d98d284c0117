import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracext.errors import DomainError
from fracext.meshing import CylinderMesh, Partition1D, graded_partition, uniform_partition


@pytest.mark.parametrize(
    "L, N, nodes",
    [(1, 2, [0, 0.5, 1]), (2, 4, [0, 0.5, 1, 1.5, 2]), (1, 1, [0, 1])],
)
def test_uniform_examples(L, N, nodes):
    assert np.array_equal(uniform_partition(L, N).nodes, nodes)


@pytest.mark.parametrize(
    "Y, M, g, nodes",
    [(1, 4, 2, [0, 1 / 16, 1 / 4, 9 / 16, 1]), (1, 4, 1, [0, 0.25, 0.5, 0.75, 1]), (2, 2, 3, [0, 0.25, 2])],
)
def test_graded_examples(Y, M, g, nodes):
    assert np.allclose(graded_partition(Y, M, g).nodes, nodes, rtol=0, atol=1e-15)


def test_graded_gamma_one_is_uniform():
    assert np.allclose(graded_partition(3.0, 7, 1.0).nodes, uniform_partition(3.0, 7).nodes, atol=1e-15)


@pytest.mark.parametrize("N", [0, -1, 2.5])
def test_uniform_bad_count(N):
    with pytest.raises(DomainError):
        uniform_partition(1.0, N)


def test_graded_errors():
    with pytest.raises(DomainError):
        graded_partition(1.0, 4, 0.5)
    with pytest.raises(DomainError):
        graded_partition(1.0, 0, 2.0)
    with pytest.raises(DomainError):
        graded_partition(0.0, 4, 2.0)


def test_partition_validation():
    with pytest.raises(DomainError):
        Partition1D([0.0, 0.5, 0.5, 1.0])
    with pytest.raises(DomainError):
        Partition1D([0.0])
    p = Partition1D([0.0, 0.3, 1.0])
    with pytest.raises(ValueError):
        p.nodes[0] = 1.0


@settings(max_examples=100, deadline=None)
@given(L=st.floats(0.1, 100), N=st.integers(1, 300), g=st.floats(1.0, 4.0))
def test_lengths_sum(L, N, g):
    for part in (uniform_partition(L, N), graded_partition(L, N, g)):
        assert np.all(part.lengths > 0)
        assert abs(math.fsum(part.lengths) - L) <= 1e-14 * max(1.0, L)
        assert part.nodes[-1] == L


@settings(max_examples=100, deadline=None)
@given(N=st.integers(2, 200), g=st.floats(1.01, 4.0))
def test_graded_lengths_increase(N, g):
    assert np.all(np.diff(graded_partition(2.0, N, g).lengths) > 0)


def test_locate():
    p = uniform_partition(1.0, 4)
    assert list(p.locate([0.0, 0.1, 0.25, 0.99, 1.0])) == [0, 0, 1, 3, 3]


def test_cylinder_ids():
    mesh = CylinderMesh(uniform_partition(1.0, 3), graded_partition(2.0, 4, 2.0), 2.0)
    assert mesh.shape == (3, 4)
    assert mesh.cell_id(0, 0) == 0
    assert mesh.cell_id(2, 0) == 2
    assert mesh.cell_id(0, 1) == 3
    for i in range(3):
        for j in range(4):
            assert mesh.cell_index(mesh.cell_id(i, j)) == (i, j)
    with pytest.raises(IndexError):
        mesh.cell_id(3, 0)
    with pytest.raises(IndexError):
        mesh.cell_index(12)


def test_cylinder_summary():
    mesh = CylinderMesh(uniform_partition(1.0, 3), graded_partition(2.0, 4, 2.0), 2.0)
    assert mesh.summary() == {"Nx": 3, "M": 4, "x_nodes": 4, "y_nodes": 5, "gamma": 2.0, "Y": 2.0}
