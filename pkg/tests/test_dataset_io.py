import numpy as np
import pytest

from tests.conftest import write_csv
from vertisplit.core.dataset_io import (
    GlobalDataset,
    ImageLayout,
    PartyPartition,
    flatten_image_split,
    load_csv,
    load_libsvm,
    load_party_files,
    materialize_parties,
)
from vertisplit.core.errors import DatasetError, PartitionError
from vertisplit.core.manifest import MANIFEST_FILE, SplitManifest


class TestLoadCsv:
    def test_header_and_label_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b,y\n1,2,0\n3,4.5,1\n")
        ds = load_csv(path, label_column="y")
        assert ds.names == ["a", "b"]
        np.testing.assert_array_equal(ds.features, [[1.0, 2.0], [3.0, 4.5]])
        np.testing.assert_array_equal(ds.labels, [0.0, 1.0])
        assert ds.source_sha256 is not None

    def test_numeric_first_row_is_data(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2\n3,4\n")
        ds = load_csv(path)
        assert ds.n == 2
        assert ds.names == ["c0", "c1"]

    def test_mixed_first_row_is_data_with_located_error(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,x\n3,4\n5,6\n")
        with pytest.raises(DatasetError, match=r"ligne 1 \(ligne 1 du fichier\), colonne 'c1'"):
            load_csv(path)

    def test_mixed_first_row_as_forced_header(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,x\n3,4\n5,6\n")
        ds = load_csv(path, header=True)
        assert ds.names == ["1", "x"]
        assert ds.n == 2

    def test_label_column_by_index(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,9\n3,4,8\n")
        ds = load_csv(path, label_column=-1)
        np.testing.assert_array_equal(ds.labels, [9.0, 8.0])
        assert ds.m == 2

    def test_non_numeric_cell_reports_location(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n3,x\n")
        with pytest.raises(DatasetError, match=r"ligne 2 \(ligne 3 du fichier\), colonne 'b'"):
            load_csv(path)

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,nan\n")
        with pytest.raises(DatasetError, match="non finie"):
            load_csv(path)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n3,4,5\n")
        with pytest.raises(DatasetError):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="introuvable"):
            load_csv(tmp_path / "absent.csv")

    def test_unknown_label_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DatasetError, match="labels"):
            load_csv(path, label_column="zzz")


class TestLoadLibsvm:
    def test_sparse_below_density_threshold(self, tmp_path):
        path = tmp_path / "d.svm"
        path.write_text("1 1:0.5 3:2\n0 2:1\n")
        ds = load_libsvm(path)
        assert ds.is_sparse
        assert (ds.n, ds.m) == (2, 3)
        np.testing.assert_array_equal(ds.dense(), [[0.5, 0.0, 2.0], [0.0, 1.0, 0.0]])
        np.testing.assert_array_equal(ds.labels, [1.0, 0.0])

    def test_dense_above_density_threshold(self, tmp_path):
        path = tmp_path / "d.svm"
        path.write_text("1 1:1 2:2\n0 1:3 2:4\n")
        ds = load_libsvm(path)
        assert not ds.is_sparse

    def test_non_increasing_indices(self, tmp_path):
        path = tmp_path / "d.svm"
        path.write_text("1 1:1\n1 3:1 2:1\n")
        with pytest.raises(DatasetError, match="ligne 2"):
            load_libsvm(path)

    def test_zero_index(self, tmp_path):
        path = tmp_path / "d.svm"
        path.write_text("1 0:1\n")
        with pytest.raises(DatasetError, match="commencent à 1"):
            load_libsvm(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "d.svm"
        path.write_text("# commentaire seulement\n\n")
        with pytest.raises(DatasetError, match="no samples"):
            load_libsvm(path)


class TestPartyPartition:
    def test_from_permutation(self):
        part = PartyPartition.from_permutation([2, 0, 1, 3], [2, 2])
        assert part.assignment.tolist() == [0, 1, 0, 1]
        assert part.members(0).tolist() == [0, 2]

    def test_out_of_range_label(self):
        with pytest.raises(PartitionError):
            PartyPartition(assignment=[0, 2], num_parties=2)

    def test_empty_party_detected(self):
        part = PartyPartition(assignment=[0, 0, 2], num_parties=3)
        assert part.has_empty_party()
        with pytest.raises(PartitionError, match="Party vide: 1"):
            part.require_nonempty()

    def test_assignment_is_read_only(self):
        part = PartyPartition(assignment=[0, 1], num_parties=2)
        with pytest.raises(ValueError):
            part.assignment[0] = 1


def test_global_dataset_rejects_non_finite():
    with pytest.raises(DatasetError):
        GlobalDataset(features=np.array([[1.0, np.inf]]))


def test_materialize_and_reload_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 5)) / 3.0
    y = rng.random(20)
    ds = GlobalDataset(features=X, labels=y, column_names=[f"x{j}" for j in range(5)])
    part = PartyPartition(assignment=[1, 0, 1, 0, 0], num_parties=2)

    materialize_parties(ds, part, tmp_path)
    assert (tmp_path / "party0.csv").read_text().splitlines()[0] == "x1,x3,x4,label"
    assert (tmp_path / "labels.csv").exists()
    manifest = SplitManifest.read(tmp_path / MANIFEST_FILE)
    assert manifest.assignment == [1, 0, 1, 0, 0]
    assert manifest.mode is None

    reloaded, reparted = load_party_files([tmp_path / "party0.csv", tmp_path / "party1.csv"])
    np.testing.assert_array_equal(reloaded.features, X[:, [1, 3, 4, 0, 2]])
    np.testing.assert_array_equal(reloaded.labels, y)
    assert reparted.counts().tolist() == [3, 2]


def test_feature_named_label_is_rejected_before_writing(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("label,b,y\n1,2,10\n3,4,20\n5,6,30\n")
    ds = load_csv(path, label_column="y")
    assert ds.names == ["label", "b"]
    out = tmp_path / "out"
    with pytest.raises(DatasetError, match="'label'"):
        materialize_parties(ds, PartyPartition(assignment=[0, 1], num_parties=2), out)
    assert not (out / "party0.csv").exists()


def test_load_party_files_row_mismatch(tmp_path):
    write_csv(tmp_path / "p0.csv", np.ones((3, 2)))
    write_csv(tmp_path / "p1.csv", np.ones((4, 2)))
    with pytest.raises(DatasetError, match="lignes"):
        load_party_files([tmp_path / "p0.csv", tmp_path / "p1.csv"])


def test_materialize_length_mismatch(tmp_path):
    ds = GlobalDataset(features=np.ones((2, 3)))
    with pytest.raises(PartitionError):
        materialize_parties(ds, PartyPartition(assignment=[0, 1], num_parties=2), tmp_path)


class TestImages:
    def test_parse_layout(self):
        layout = ImageLayout.parse("28x28")
        assert (layout.height, layout.width, layout.channels) == (28, 28, 1)
        assert ImageLayout.parse("4x2x3").size == 24

    def test_parse_invalid(self):
        with pytest.raises(DatasetError):
            ImageLayout.parse("28-28")

    def test_background_fill(self):
        ds = GlobalDataset(features=np.array([[1.0, 2.0, 3.0, 4.0]]))
        part = PartyPartition(assignment=[0, 1, 0, 1], num_parties=2)
        images = flatten_image_split(ds, part, ImageLayout(2, 2, 1, background_value=-1.0), 0)
        assert images.shape == (1, 1, 2, 2)
        np.testing.assert_array_equal(images[0, 0], [[1.0, -1.0], [3.0, -1.0]])

    def test_layout_size_mismatch(self):
        ds = GlobalDataset(features=np.ones((1, 5)))
        part = PartyPartition(assignment=[0] * 5, num_parties=1)
        with pytest.raises(DatasetError):
            flatten_image_split(ds, part, ImageLayout(2, 2), 0)
