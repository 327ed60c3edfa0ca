import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leonetsim.fileio.config import ConfigError, config_to_dict, parse_config, serialize_config
from leonetsim.fileio.czml import link_packet, sampled_position_packet, write_czml
from leonetsim.fileio.ins import InsFormatError, read_ins, write_ins
from leonetsim.fileio.sce import active_runs, expected_files, generate_sce
from leonetsim.fileio.tables import LATENCY_COLUMNS, csv_text, write_csv
from leonetsim.routing import InstanceSeries, PathRecord
from leonetsim.scenario import template, template_text

EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)

SMALL = """
name: small
simulation: {duration_s: 60, step_s: 10}
layers:
  - name: L0
    walker: {total: 40, planes: 5, phasing: 1, inclination_deg: 53, altitude_km: 1000}
    isl: "+Grid 1"
    eisl: {range_km: 3000, ports: 1}
ground_stations:
  - {id: GS-0000, name: Harbin, lat_deg: 45, lon_deg: 127}
mobile_stations:
  - id: MS-000
    kind: aircraft
    waypoints:
      - {t_s: 20, lat_deg: 0, lon_deg: -24, alt_km: 10}
      - {t_s: 40, lat_deg: 0, lon_deg: 20, alt_km: 10}
"""


def test_table1_config():
    cfg = template("table1")
    lay = cfg.layers[0]
    assert (lay.walker.total_sats, lay.walker.planes, lay.walker.phasing) == (400, 20, 0)
    assert lay.walker.altitude_km == 1000 and lay.walker.inclination_deg == 53
    assert lay.isl.label == "*Grid 1"
    assert cfg.grid.count == 200
    assert cfg.link_budget.bandwidth_hz == 250e6
    assert cfg.link_budget.eirp_w == pytest.approx(1e4)
    assert [g.id for g in cfg.ground_stations][:2] == ["GS-0000", "GS-0001"]


@pytest.mark.parametrize(
    "text, key",
    [
        ("", "name"),
        ("name: x", "layers"),
        (SMALL.replace("total: 40", "total: 41"), "layers[0].walker"),
        (SMALL.replace("step_s: 10", "step_s: 0"), "simulation.step_s"),
        (SMALL.replace("GS-0000", "G0"), "ground_stations[0].id"),
        (SMALL + "bogus: 1\n", "bogus"),
        ("name: [unclosed", ""),
    ],
)
def test_config_errors(text, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert str(err.value).startswith(key)


def test_serialize_roundtrip_templates():
    for name in ("table1", "density10", "density40"):
        cfg = template(name)
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert serialize_config(again) == serialize_config(cfg)


@settings(max_examples=40, deadline=None)
@given(
    planes=st.sampled_from([3, 4, 5]),
    per_plane=st.integers(3, 6),
    f=st.integers(0, 1),
    alt=st.floats(300, 2000),
    inc=st.floats(1, 180),
    alpha=st.floats(1, 80),
    seed=st.integers(0, 2**31),
)
def test_serialize_roundtrip_random(planes, per_plane, f, alt, inc, alpha, seed):
    doc = config_to_dict(parse_config(SMALL))
    doc["layers"][0]["walker"].update(
        total=planes * per_plane, planes=planes, phasing=f, altitude_km=alt, inclination_deg=inc
    )
    doc["coverage"]["steering_angle_deg"] = alpha
    doc["demands"]["seed"] = seed
    import yaml

    cfg = parse_config(yaml.safe_dump(doc))
    assert parse_config(serialize_config(cfg)) == cfg


def test_generate_sce(tmp_path):
    cfg = parse_config(SMALL)
    folder = generate_sce(cfg, tmp_path / "a")
    assert list(folder.files) == expected_files(cfg)
    assert len(folder.files) == 13
    again = generate_sce(cfg, tmp_path / "b")
    for name in folder.files:
        assert (folder.path / name).read_bytes() == (again.path / name).read_bytes(), name
    assert parse_config((folder.path / "config.yaml").read_text()) == cfg

    sats = json.loads((folder.path / "L0_sats.czml").read_text())
    assert sats[0]["id"] == "document" and len(sats) == 41
    assert len(sats[1]["position"]["cartesian"]) == 4 * 6
    isls = json.loads((folder.path / "L0_isls.json").read_text())
    assert len(isls["intra"]) == 40 and len(isls["inter"]) == 40
    mses = json.loads((folder.path / "mses.czml").read_text())
    ms = mses[1]
    assert ms["availability"] == "2024-01-01T00:00:20Z/2024-01-01T00:00:40Z"
    assert ms["position"]["cartesian"][::4] == [20.0, 30.0, 40.0]
    tle = (folder.path / "L0_tle.txt").read_text().splitlines()
    assert len(tle) == 80 and all(len(line) == 69 for line in tle)
    eisl = json.loads((folder.path / "L0_eisl.json").read_text())
    assert eisl["entries"][0]["interval"][0] == 0.0
    assert eisl["entries"][-1]["interval"][1] == 50.0


def test_generate_sce_without_stations(tmp_path):
    doc = config_to_dict(parse_config(SMALL))
    doc["ground_stations"], doc["mobile_stations"] = [], []
    cfg = parse_config(serialize_config(parse_config(json.dumps(doc))))
    folder = generate_sce(cfg, tmp_path)
    for name in ("gses.czml", "mses.czml", "L0_gsls.czml", "L0_msls.czml"):
        assert json.loads((folder.path / name).read_text()) == [
            {"id": "document", "name": "small", "version": "1.0"}
        ]
    assert json.loads((folder.path / "L0_gsls.json").read_text())["entries"][0]["edges"] == []


def test_czml_packets():
    assert json.loads(write_czml([], "x")) == [{"id": "document", "name": "x", "version": "1.0"}]
    pk = sampled_position_packet("S0", EPOCH, [0, 10, 20], [(1, 2, 3)] * 3)
    assert pk["position"]["cartesian"][:4] == [0.0, 1000.0, 2000.0, 3000.0]
    assert len(pk["position"]["cartesian"]) == 12
    times = [0, 1, 2, 3, 4, 5, 6]
    runs = active_runs(times, [t in (2, 3, 4, 5) for t in times])
    assert runs == [(2, 5)]
    link = link_packet("ISL/A/B", "A", "B", EPOCH, runs)
    assert link["availability"] == "2024-01-01T00:00:02Z/2024-01-01T00:00:05Z"
    assert active_runs(times, [t % 3 == 0 for t in times]) == [(0, 0), (3, 3), (6, 6)]
    with pytest.raises(ValueError):
        write_czml([{"id": "a"}, {"id": "a"}], "x")


def test_ins_empty_and_errors():
    text = write_ins(InstanceSeries({"policy": "shortest_path"}, []))
    assert text.count("\n") == 1
    back = read_ins(text)
    assert back.records == [] and back.meta == {"policy": "shortest_path"}
    with pytest.raises(InsFormatError) as err:
        read_ins(text + "{not json\n")
    assert err.value.line == 2
    with pytest.raises(InsFormatError):
        read_ins("")
    with pytest.raises(InsFormatError):
        read_ins('{"format": "other"}\n')


def test_ins_roundtrip_example():
    rec = PathRecord(0.0, "GS-0000", "GS-0001", ("GS-0000", "SAT-0-1", "GS-0001"), 2500.0, 2500.0 / 299792.458, 2, True)
    miss = PathRecord.not_found(10.0, "GS-0000", "GS-0001")
    series = InstanceSeries({"policy": "shortest_path", "grid": {"step_s": 10.0}}, [miss, rec])
    back = read_ins(write_ins(series))
    assert back.records == [rec, miss]
    assert back.meta == series.meta


node = st.sampled_from(["GS-0000", "GS-0001", "MS-000", "SAT-0-0", "SAT-1-3"])


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(0, 1e5, allow_nan=False),
            st.lists(node, min_size=2, max_size=6),
            st.floats(0, 1e5, allow_nan=False),
        ),
        max_size=12,
    )
)
def test_ins_roundtrip_random(rows):
    recs = [PathRecord(t, p[0], p[-1], tuple(p), d, d / 299792.458, len(p) - 1, True) for t, p, d in rows]
    back = read_ins(write_ins(InstanceSeries({}, recs)))
    assert back.records == sorted(recs, key=lambda r: (r.t, r.src, r.dst))


def test_csv(tmp_path):
    text = csv_text(LATENCY_COLUMNS, [(0.0, "GS-0000-GS-0001", "shortest_path", 12.5, None, 0)])
    assert text == "t,pair,policy,latency_ms,stretch,churn\r\n0.0,GS-0000-GS-0001,shortest_path,12.5,,0\r\n"
    quoted = csv_text(("a", "b"), [("x,y", 'say "hi"')])
    assert quoted.splitlines()[1] == '"x,y","say ""hi"""'
    assert "1e-07" in csv_text(("v",), [(1e-7,)])
    path = tmp_path / "t.csv"
    write_csv(path, ("a",), [])
    assert path.read_bytes() == b"a\r\n"


def test_templates_bundled():
    for name in ("table1", "density10", "density20", "density30", "density40"):
        assert template_text(name).startswith("#")
