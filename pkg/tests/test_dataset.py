import numpy as np
import pytest

from core.errors import DegenerateInput, InvalidInput
from core.model.dataset import (
    FingerprintDataset,
    FingerprintRecord,
    Position,
    csv_header,
    read_fingerprint_csv,
    write_fingerprint_csv,
)
from core.model.matrix import (
    AxisEstimateMatrix,
    build_axis_matrix,
    correlation_matrix,
    dataset_from_axis_matrices,
    remove_dependent_columns,
)


def _record(point_id, truth, *estimates):
    return FingerprintRecord(point_id, Position(*truth), tuple(Position(*e) for e in estimates))


@pytest.fixture
def small_dataset():
    return FingerprintDataset(
        ("ble", "wifi"),
        (
            _record("a", (0.0, 1.0, 0.0), (0.5, 1.0, 0.0), (0.25, 1.5, 0.0)),
            _record("b", (2.0, 0.0, 1.0), (1.5, 0.5, 1.0), (2.75, 0.0, 0.5)),
            _record("c", (4.0, 2.0, 0.0), (4.5, 2.5, 0.0), (3.0, 1.0, 0.25)),
        ),
    )


class TestPosition:
    def test_defaults_and_access(self):
        p = Position(3.0)
        assert (p.x, p.y, p.z) == (3.0, 0.0, 0.0)
        assert p.coordinate("x") == 3.0
        assert p.replace("z", 2.0) == Position(3.0, 0.0, 2.0)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInput):
            Position(float("nan"))
        with pytest.raises(InvalidInput):
            Position(0.0, float("inf"))

    def test_unknown_axis(self):
        with pytest.raises(InvalidInput):
            Position(1.0).coordinate("w")


class TestFingerprintDataset:
    def test_validation(self):
        with pytest.raises(InvalidInput):
            FingerprintDataset((), (_record("a", (0, 0, 0)),))
        with pytest.raises(InvalidInput):
            FingerprintDataset(("ble", "ble"), (_record("a", (0, 0, 0), (0, 0, 0), (0, 0, 0)),))
        with pytest.raises(InvalidInput):
            FingerprintDataset(("ble",), ())
        with pytest.raises(InvalidInput, match="estimates"):
            FingerprintDataset(("ble", "wifi"), (_record("a", (0, 0, 0), (0, 0, 0)),))
        with pytest.raises(InvalidInput, match="Duplicate"):
            FingerprintDataset(("ble",), (_record("a", (0, 0, 0), (0, 0, 0)), _record("a", (1, 0, 0), (1, 0, 0))))

    def test_subset_and_filter(self, small_dataset):
        assert [r.point_id for r in small_dataset.subset([2, 0]).records] == ["c", "a"]
        near = small_dataset.filter(lambda r: r.true_position.x <= 2.0)
        assert len(near) == 2
        assert small_dataset.filter(lambda r: r.true_position.x > 100) is None
        assert small_dataset.technology_index("wifi") == 1
        with pytest.raises(InvalidInput):
            small_dataset.technology_index("zigbee")


class TestFingerprintCsv:
    def test_header_layout(self):
        assert csv_header(["ble", "wifi"]) == [
            "point_id", "true_x", "true_y", "true_z",
            "est_x_ble", "est_y_ble", "est_z_ble",
            "est_x_wifi", "est_y_wifi", "est_z_wifi",
        ]

    def test_write_then_read_reproduces_dataset(self, small_dataset, tmp_path):
        path = tmp_path / "fp.csv"
        write_fingerprint_csv(small_dataset, str(path))
        raw = path.read_bytes()
        assert b"\r\n" not in raw
        assert raw.splitlines()[0] == b",".join(h.encode() for h in csv_header(["ble", "wifi"]))
        assert read_fingerprint_csv(str(path)) == small_dataset

    def test_hand_written_file(self, tmp_path):
        path = tmp_path / "fp.csv"
        path.write_text(
            "point_id,true_x,true_y,true_z,est_x_a,est_y_a,est_z_a\n"
            "p1,1.5,0,0,1.25,0,0\n"
            "\n"
            "p2,3,0,0,3.5,0,0\n",
            encoding="utf-8",
        )
        dataset = read_fingerprint_csv(str(path))
        assert dataset.technologies == ("a",)
        assert [r.estimates[0].x for r in dataset.records] == [1.25, 3.5]

    @pytest.mark.parametrize(
        "content",
        [
            "",
            "id,true_x,true_y,true_z,est_x_a,est_y_a,est_z_a\n",
            "point_id,true_x,true_y,true_z,est_x_a,est_y_a\n",
            "point_id,true_x,true_y,true_z,est_x_a,est_y_b,est_z_a\n",
            "point_id,true_x,true_y,true_z,est_x_a,est_y_a,est_z_a\np1,1,0,0,oops,0,0\n",
            "point_id,true_x,true_y,true_z,est_x_a,est_y_a,est_z_a\np1,1,0,0,1\n",
        ],
    )
    def test_malformed_files(self, tmp_path, content):
        path = tmp_path / "bad.csv"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(InvalidInput):
            read_fingerprint_csv(str(path))


class TestAxisMatrix:
    def test_build_matches_records(self, small_dataset):
        u = build_axis_matrix(small_dataset, "x")
        np.testing.assert_array_equal(u.entries, [[0.5, 0.25], [1.5, 2.75], [4.5, 3.0]])
        np.testing.assert_array_equal(u.truth, [0.0, 2.0, 4.0])
        assert u.columns == (0, 1)
        assert not u.entries.flags.writeable

    def test_axis_matrices_rebuild_dataset(self, small_dataset):
        matrices = {axis: build_axis_matrix(small_dataset, axis) for axis in ("x", "y", "z")}
        rebuilt = dataset_from_axis_matrices(matrices, small_dataset.technologies, ["a", "b", "c"])
        assert rebuilt == small_dataset

    def test_shape_checks(self):
        with pytest.raises(InvalidInput):
            AxisEstimateMatrix("x", np.zeros(3), np.zeros(3))
        with pytest.raises(InvalidInput):
            AxisEstimateMatrix("x", np.zeros((3, 2)), np.zeros(2))
        with pytest.raises(InvalidInput):
            AxisEstimateMatrix("x", np.array([[np.nan]]), np.zeros(1))


class TestCorrelationMatrix:
    def test_identity(self):
        c = correlation_matrix(AxisEstimateMatrix("x", np.eye(2), np.zeros(2)))
        np.testing.assert_array_equal(c.entries, np.eye(2))

    def test_dependent_columns_are_singular(self):
        c = correlation_matrix(AxisEstimateMatrix("x", np.array([[1.0, 2.0], [2.0, 4.0]]), np.zeros(2)))
        np.testing.assert_allclose(c.entries, [[5.0, 10.0], [10.0, 20.0]])
        assert abs(np.linalg.det(c.entries)) < 1e-9

    def test_hand_computed(self, two_by_two):
        c = correlation_matrix(two_by_two)
        np.testing.assert_allclose(c.entries, [[1.22, 0.70], [0.70, 0.52]], atol=1e-12)

    def test_positive_semidefinite_and_definite_after_hygiene(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            entries = rng.standard_normal((6, 4))
            entries[:, 3] = entries[:, 0] - 2.0 * entries[:, 2]
            u = AxisEstimateMatrix("x", entries, np.zeros(6))
            c = correlation_matrix(u)
            assert c.is_symmetric()
            assert c.eigenvalues().min() >= -1e-10 * c.eigenvalues().max()
            reduced, _ = remove_dependent_columns(u)
            assert correlation_matrix(reduced).is_positive_definite()


class TestRemoveDependentColumns:
    def test_keeps_earlier_of_a_dependent_pair(self):
        reduced, removed = remove_dependent_columns(AxisEstimateMatrix("x", np.array([[1.0, 2.0], [2.0, 4.0]]), np.zeros(2)))
        assert removed == [1]
        assert reduced.columns == (0,)

    def test_full_rank_unchanged(self):
        reduced, removed = remove_dependent_columns(AxisEstimateMatrix("x", np.eye(3), np.zeros(3)))
        assert removed == []
        np.testing.assert_array_equal(reduced.entries, np.eye(3))

    def test_combination_column_removed(self):
        rng = np.random.default_rng(11)
        entries = rng.standard_normal((8, 4))
        entries[:, 3] = 0.5 * entries[:, 0] + 0.5 * entries[:, 1]
        reduced, removed = remove_dependent_columns(AxisEstimateMatrix("x", entries, np.zeros(8)))
        assert removed == [3]
        assert reduced.columns == (0, 1, 2)
        assert np.linalg.matrix_rank(reduced.entries) == 3

    def test_more_columns_than_rows(self):
        _, removed = remove_dependent_columns(AxisEstimateMatrix("x", np.array([[1.0, 2.0, 3.0]]), np.zeros(1)))
        assert removed == [1, 2]

    def test_all_zero_is_degenerate(self):
        with pytest.raises(DegenerateInput):
            remove_dependent_columns(AxisEstimateMatrix("x", np.zeros((3, 2)), np.zeros(3)))

    def test_tolerance_must_be_positive(self):
        with pytest.raises(InvalidInput):
            remove_dependent_columns(AxisEstimateMatrix("x", np.eye(2), np.zeros(2)), tol=0.0)
