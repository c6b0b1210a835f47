import numpy as np
import pytest

from rankcertify.affine import AffineSet
from rankcertify.exceptions import InputError
from rankcertify.serialize import (
    affine_from_json,
    affine_to_json,
    matrix_from_json,
    matrix_to_json,
    problem_from_json,
)


class TestMatrixFormat:
    def test_round_trip(self):
        X = np.random.default_rng(0).standard_normal((3, 4))
        assert np.array_equal(matrix_from_json(matrix_to_json(X)), X)

    def test_missing_fields_rejected(self):
        with pytest.raises(InputError):
            matrix_from_json({"rows": 2, "data": [[1, 2], [3, 4]]})

    def test_ragged_rows_rejected(self):
        with pytest.raises(InputError):
            matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 2], [3]]})

    def test_row_count_mismatch_rejected(self):
        with pytest.raises(InputError):
            matrix_from_json({"rows": 3, "cols": 2, "data": [[1, 2], [3, 4]]})

    def test_nonfinite_rejected(self):
        with pytest.raises(InputError):
            matrix_from_json({"rows": 1, "cols": 1, "data": [[float("nan")]]})


class TestAffineFormat:
    def test_round_trip(self):
        rng = np.random.default_rng(1)
        S = AffineSet([rng.standard_normal((2, 3)) for _ in range(2)], [1.0, -2.0])
        S2 = affine_from_json(affine_to_json(S))
        assert S2.l == 2 and np.array_equal(S2.rhs, S.rhs)
        for A, B in zip(S.mats, S2.mats):
            assert np.array_equal(A, B)

    def test_missing_constraints_rejected(self):
        with pytest.raises(InputError):
            affine_from_json({})


class TestProblemFormat:
    def test_hankel_from_matrix(self):
        H = np.random.default_rng(2).standard_normal((3, 3))
        prob = problem_from_json({"type": "hankel", "rank": 2, "params": {"H": matrix_to_json(H)}})
        assert prob.name == "hankel" and prob.r == 2

    def test_hankel_from_signal(self):
        prob = problem_from_json(
            {"type": "hankel", "rank": 1, "params": {"signal": [1, 2, 3, 4, 5], "rows": 3}}
        )
        assert prob.constraints.m == 3 and prob.constraints.n == 3

    def test_hankel_missing_params(self):
        with pytest.raises(InputError):
            problem_from_json({"type": "hankel", "rank": 2, "params": {}})

    def test_lrr_from_N(self):
        prob = problem_from_json({"type": "lrr", "rank": 2, "params": {"N": 4}})
        assert prob.name == "lrr" and prob.constraints.m == 4

    def test_lrr_from_B_list(self):
        Bs = [matrix_to_json(np.eye(3)) for _ in range(3)]
        prob = problem_from_json({"type": "lrr", "rank": 2, "params": {"B_list": Bs}})
        assert prob.objective.convex

    def test_quadratic(self):
        C = matrix_to_json(np.zeros((2, 2)) + 1.0)
        Q = matrix_to_json(np.eye(4))
        constraints = [{"A": matrix_to_json(np.eye(2)), "b": 1.0}]
        prob = problem_from_json(
            {"type": "quadratic", "rank": 1, "params": {"Q": Q, "C": C, "constraints": constraints}}
        )
        assert prob.name == "quadratic"

    def test_diagonal(self):
        prob = problem_from_json(
            {
                "type": "diagonal",
                "rank": 1,
                "params": {
                    "a_list": [[1.0, 1.0, 1.0]],
                    "b": [1.0],
                    "gQ": matrix_to_json(np.eye(3)),
                    "gc": [0.0, 0.0, 0.0],
                },
            }
        )
        assert prob.structure == "diagonal"
        X = np.diag([1.0, 0.0, 0.0])
        assert prob.objective.value(X) == pytest.approx(0.5)

    def test_unknown_type_rejected(self):
        with pytest.raises(InputError):
            problem_from_json({"type": "mystery", "rank": 1, "params": {}})

    def test_nonpositive_rank_rejected(self):
        with pytest.raises(InputError):
            problem_from_json({"type": "lrr", "rank": 0, "params": {"N": 3}})
