import json

import numpy as np
import pytest

from zerocert.certificates import dump_document, load_document, make_document
from zerocert.prune import PruneAborted
from zerocert.scan import (GapCertificate, ScanConfig, classify_locus_point, render_locus_2d, scan,
                           survivor_prefix_property)
from zerocert.series import B2


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(0.5, 0.4, 10)
    with pytest.raises(ValueError):
        ScanConfig(0.4, 0.5, 0)


def test_cells_tile_exactly():
    cfg = ScanConfig(0.3, 0.7, 7)
    cells = [cfg.cell(i) for i in range(7)]
    assert cells[0][0] == 0.3 and cells[-1][1] == 0.7
    assert all(cells[i][1] == cells[i + 1][0] for i in range(6))


def test_scan_excludes_low_range():
    cert = scan(0.4, 0.45, 10, depth=30)
    assert cert.fully_excluded
    assert cert.gaps == [(0.4, 0.45)]


def test_trivial_region_all_survivors():
    cert = scan(0.71, 0.711, 10, depth=20)
    assert not any(c.excluded for c in cert.cells)
    assert cert.gaps == []


def test_gap_merging():
    cert = scan(0.6684, 0.66856, 8, depth=35)
    doc = cert.as_dict()
    total = sum(g["cells"] for g in doc["gaps"])
    assert total == doc["summary"]["excluded"]
    for g, h in zip(doc["gaps"], doc["gaps"][1:]):
        assert g["hi"] < h["lo"]


def test_refine_increases_exclusion():
    base = scan(0.668478, 0.668479, 10, depth=40)
    ref = scan(0.668478, 0.668479, 10, depth=40, refine=3, max_depth=50)
    assert not base.fully_excluded
    assert ref.fully_excluded


def test_abort_carries_cell_index():
    with pytest.raises(PruneAborted) as info:
        scan(0.746, 0.7465, 2, depth=60, mult=3, max_nodes=1000)
    assert info.value.cell_index == 0


def test_bprime_range_sample():
    cert = scan(0.51, 0.52, 100, depth=30, coeff_set=B2, refine=2, max_depth=40)
    assert cert.fully_excluded


def test_checkpoint_resume(tmp_path):
    ck = tmp_path / "ck.json"
    full = scan(0.6, 0.6004, 12, depth=25)
    part = scan(0.6, 0.6004, 12, depth=25, checkpoint=ck, checkpoint_every=5)
    data = json.loads(ck.read_text())
    assert data["done"] == 12
    # truncate the checkpoint and resume
    data["cells"] = data["cells"][:5]
    data["done"] = 5
    ck.write_text(json.dumps(data))
    resumed = scan(0.6, 0.6004, 12, depth=25, checkpoint=ck, checkpoint_every=5)
    assert dump_document(resumed.as_dict()) == dump_document(full.as_dict()) == dump_document(part.as_dict())


def test_checkpoint_config_mismatch(tmp_path):
    ck = tmp_path / "ck.json"
    scan(0.6, 0.6004, 4, depth=25, checkpoint=ck)
    with pytest.raises(ValueError):
        scan(0.6, 0.6004, 4, depth=26, checkpoint=ck)


def test_determinism_across_jobs():
    kw = dict(lo=0.6684, hi=0.66842, grid=6, depth=30)
    assert dump_document(scan(jobs=1, **kw).as_dict()) == dump_document(scan(jobs=3, **kw).as_dict())


def test_certificate_roundtrip():
    cert = scan(0.4, 0.41, 3, depth=20)
    doc = make_document("gap-certificate", cert.config.as_dict(), cert.as_dict(), "positive")
    back = load_document(dump_document(doc))
    assert back == json.loads(dump_document(doc))
    doc["config"]["grid"] = 4
    with pytest.raises(ValueError):
        load_document(dump_document(doc))


def test_prefix_property_depth_zero():
    rep = survivor_prefix_property(0.5, 0.51, depth=0, grid=2)
    assert rep.holds


def test_prefix_property_small():
    rep = survivor_prefix_property(0.5, 0.51, depth=20, grid=5)
    assert rep.holds, rep.violations


def test_locus_points():
    assert classify_locus_point(0.8, 0.7, 10) == "trivial"
    assert classify_locus_point(0.6685, 0.6685, 12) == "unknown"
    assert classify_locus_point(0.3, 0.4, 12) == "excluded"


def test_render_outputs():
    grid = render_locus_2d((0.3, 0.9, 0.3, 0.9), 6, depth=10)
    pgm = grid.to_pgm().splitlines()
    assert pgm[0] == "P2" and pgm[2] == "6 6" and len(pgm) == 4 + 6
    csv = grid.to_csv().splitlines()
    assert csv[0] == "gamma,lambda,label" and len(csv) == 37
    labels = {row.split(",")[2] for row in csv[1:]}
    assert {"excluded", "trivial"} <= labels
    with pytest.raises(ValueError):
        render_locus_2d((0.0, 1.0, 0.5, 0.6), 2)
