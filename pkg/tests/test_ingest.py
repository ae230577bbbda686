import numpy as np
import pytest

from corrnet.ingest import IngestError, load_csv_matrix, write_csv_matrix


def test_shape_and_round_trip(tmp_path, gen):
    x = gen.normal(size=(64, 750))
    p = tmp_path / "eeg.csv"
    write_csv_matrix(x, p)
    m = load_csv_matrix(p)
    assert (m.rows, m.cols) == (64, 750)
    assert m.values.tobytes() == x.tobytes()
    assert m.provenance == str(p)


def test_whitespace_and_comments(tmp_path):
    p = tmp_path / "a.txt"
    p.write_text("# subject 1\n1 2 3\n\n4 5 6\n")
    assert load_csv_matrix(p, provenance="s1").values.tolist() == [[1, 2, 3], [4, 5, 6]]


@pytest.mark.parametrize("text,msg", [
    ("1,2,3\n4,5,6\n7,8\n", "ragged row 3"),
    ("1,2\n3,x\n", "non-numeric cell 'x' at row 2, column 2"),
    ("1,2\n3 4\n", "mixed delimiters"),
    ("# only comments\n\n", "empty file"),
    ("1,nan\n", "non-finite value at row 1, column 2"),
])
def test_malformed_files(tmp_path, text, msg):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(IngestError, match=msg):
        load_csv_matrix(p)
