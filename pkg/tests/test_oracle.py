import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathsat.oracle import (OracleTooLarge, UnknownConstruct, bubble_k_longest_recurrence,
                            enumerate_feasible_paths, enumerate_shape_space,
                            longest_feasible_path, predict, shape_for_dims)


def test_linear_len1_d2(linear):
    paths = enumerate_feasible_paths(linear, {"d": 1}, 2)
    assert paths.keys() == {"a b -a", "a -b -a"}


@pytest.mark.parametrize("dims", [(1, 1, 1), (2, 1, 3), (3, 2, 1)])
def test_matrix_single_path(matrix, dims):
    assert len(enumerate_feasible_paths(matrix, shape_for_dims(matrix, dims), 1)) == 1


def test_bubble_len2_d2(bubble):
    paths = enumerate_feasible_paths(bubble, {"n": 2}, 2)
    assert paths.keys() == {"a b -c -b -a", "a b c -b -a"}


def test_longest_linear(linear):
    assert longest_feasible_path(linear, {"d": 3}, 2)[1] == 7


def test_longest_bubble(bubble):
    assert longest_feasible_path(bubble, {"n": 4}, 4)[1] == 19


def test_longest_matrix_121(matrix):
    key, length = longest_feasible_path(matrix, shape_for_dims(matrix, (1, 2, 1)), 1)
    assert (key, length) == ("a b c c -c -b -a", 7)


def test_longest_tie_break(linear):
    key, _ = longest_feasible_path(linear, {"d": 2}, 2)
    assert key == min(enumerate_feasible_paths(linear, {"d": 2}, 2).keys())


def test_oracle_cap(bubble):
    with pytest.raises(OracleTooLarge):
        enumerate_feasible_paths(bubble, {"n": 8}, 10, cap=1000)
    with pytest.raises(OracleTooLarge):
        enumerate_shape_space(bubble, 8, 10, cap=1000)


@pytest.mark.parametrize("construct, dims, expected", [
    ("linear", (10,), (10, 11, 21)),
    ("matrix", (3, 3, 3), (27, 28, 52)),
    ("matrix", (5, 3, 8), (120, 121, 211)),
    ("matrix", (4, 4, 4), (64, 65, 105)),
    ("bubble", (4,), (6, 7, 19)),
])
def test_predict_examples(construct, dims, expected):
    e = predict(construct, dims)
    assert (e.k_l, e.k_s, e.l_max) == expected


def test_predict_merge():
    e = predict("merge", (2, 2))
    assert e.l_max == 10 and e.k_l == 4 and e.k_s is None
    assert predict("merge", 2) == e


def test_predict_rejects():
    with pytest.raises(UnknownConstruct):
        predict("quicksort", (3,))
    with pytest.raises(ValueError):
        predict("linear", (0,))


@given(st.integers(1, 200))
def test_bubble_recurrence_matches_closed_form(n):
    assert bubble_k_longest_recurrence(n) == predict("bubble", (n,)).k_l


@pytest.mark.parametrize("name, size", [("linear", 3), ("bubble", 4), ("merge", 2)])
def test_bigger_domain_never_loses_paths(name, size, request):
    subject = request.getfixturevalue(name)
    small = enumerate_shape_space(subject, size, 2).keys()
    large = enumerate_shape_space(subject, size, 3).keys()
    assert small <= large


@pytest.mark.parametrize("name, size", [("linear", 2), ("bubble", 3), ("merge", 2)])
def test_domain_of_element_count_is_enough(name, size, request):
    """Once the domain has as many values as there are cells, every ordering
    pattern is available and one more value adds no new path."""
    subject = request.getfixturevalue(name)
    from pathsat.schema import all_shapes, element_count
    d = max(element_count(subject.schema, s) for s in all_shapes(subject.schema, size))
    assert (enumerate_shape_space(subject, size, d).keys()
            == enumerate_shape_space(subject, size, d + 1).keys())
