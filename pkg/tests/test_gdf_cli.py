import json
import os
import subprocess
import sys

import pytest

from xmodforge import cli, crossing as cr, fingrpd, gdf, xmod

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture(name):
    return os.path.join(FIXTURES, name)


def run_cli(argv):
    return cli.main(argv)


def test_parse_pair2_fixture():
    with open(fixture("pair2.gdf")) as fh:
        text = fh.read()
    doc = gdf.parse_gdf(text)
    env = gdf.build_document(doc)
    assert len(env["PAIR2"].arrows) == 4


def test_print_parse_idempotent_on_fixtures():
    for name in ("pair2.gdf", "sc2.gdf", "osc2.gdf"):
        with open(fixture(name)) as fh:
            text = fh.read()
        assert gdf.print_gdf(gdf.parse_gdf(text)) == text


def test_missing_tgt_is_syntax_error():
    text = "groupoid G {\n  objects: x\n  arrows: e\n  src: e=x\n" \
           "  inv: e=e\n  unit: x=e\n  comp: e.e=e\n}\n"
    with pytest.raises(gdf.GDFSyntaxError) as e:
        gdf.parse_gdf(text)
    assert "tgt" in str(e.value)
    assert e.value.line == 1


def test_unresolved_reference():
    text = "xmod X {\n  groupoid: NOPE\n  bundle: NOPE\n" \
           "  boundary: a=b\n  act: a.b=c\n}\n"
    doc = gdf.parse_gdf(text)
    with pytest.raises(gdf.UnresolvedReference):
        gdf.build_document(doc)


def test_duplicate_name():
    block = "groupoid G {\n  objects: x\n  arrows: e\n  src: e=x\n" \
            "  tgt: e=x\n  inv: e=e\n  unit: x=e\n  comp: e.e=e\n}\n"
    with pytest.raises(gdf.DuplicateName):
        gdf.parse_gdf(block + block)


def test_canonical_printing_deterministic(tmp_path):
    sc2 = xmod.inertia_xmod(fingrpd.cyclic_groupoid(2))
    t1 = gdf.print_gdf(gdf.document_of(gdf.xmod_blocks("SC2", sc2)))
    sc2b = xmod.inertia_xmod(fingrpd.cyclic_groupoid(2))
    t2 = gdf.print_gdf(gdf.document_of(gdf.xmod_blocks("SC2", sc2b)))
    assert t1 == t2


def test_cmd_check_pass(capsys):
    assert run_cli(["check", fixture("sc2.gdf")]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "[PASS] xmod SC2" in out


def test_cmd_check_crossing_itemized(capsys):
    assert run_cli(["check", fixture("osc2.gdf")]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "[PASS] crossing OSC2 (6 checks" in out


def test_cmd_check_corrupted_fails(tmp_path, capsys):
    with open(fixture("sc2.gdf")) as fh:
        text = fh.read()
    bad = text.replace("act: c0.c0=c0 c0.c1=c1 c1.c0=c0 c1.c1=c1",
                       "act: c0.c0=c0 c0.c1=c1 c1.c0=c1 c1.c1=c0")
    p = tmp_path / "bad.gdf"
    p.write_text(bad)
    assert run_cli(["check", str(p)]) == cli.EXIT_VALIDATION
    out = capsys.readouterr().out
    assert "FAIL" in out


def test_cmd_check_syntax_exit_code(tmp_path, capsys):
    p = tmp_path / "broken.gdf"
    p.write_text("groupoid G {\n  objects x\n}\n")
    assert run_cli(["check", str(p)]) == cli.EXIT_SYNTAX


def test_cmd_check_missing_file_exit_code(capsys):
    assert run_cli(["check", "/nonexistent.gdf"]) == cli.EXIT_SYNTAX


def test_cap_exit_code(capsys):
    assert run_cli(["--cap-enum", "2", "enumerate-extensions",
                    "--group", "Z2", "--module", "Z2"]) == cli.EXIT_CAP


def test_json_report(capsys):
    assert run_cli(["--json-report", "check", fixture("pair2.gdf")]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data[0]["name"] == "PAIR2"
    assert data[0]["passed"] is True


def test_cmd_compose_diamond(capsys):
    code = run_cli(["compose", fixture("osc2.gdf"), "--op", "diamond",
                    "--inputs", "OSC2", "OSC2", "--name", "D"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    doc = gdf.parse_gdf(out)
    env = gdf.build_document(doc)
    assert env["D"].is_extension


def test_cmd_compose_bullet_identity(tmp_path, capsys):
    sc2 = xmod.inertia_xmod(fingrpd.cyclic_groupoid(2))
    o = cr.trivial_xext(sc2)
    from xmodforge import exchanger as exm
    i = exm.trivial_exchanger(o)
    blocks = gdf.exchanger_blocks("I", i)
    p = tmp_path / "exch.gdf"
    p.write_text(gdf.print_gdf(gdf.document_of(blocks)))
    code = run_cli(["compose", str(p), "--op", "bullet",
                    "--inputs", "I", "I", "--name", "II"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    env = gdf.build_document(gdf.parse_gdf(out))
    from xmodforge import bibundle as bb
    assert bb.search_equivariant_iso(env["II"].p, i.p) is not None


def test_cmd_compose_pullback(tmp_path, capsys):
    with open(fixture("sc2.gdf")) as fh:
        text = fh.read()
    text += ("morphism two {\n  objects: z0=* z1=*\n}\n")
    p = tmp_path / "in.gdf"
    p.write_text(text)
    code = run_cli(["compose", str(p), "--op", "pullback:two",
                    "--inputs", "SC2", "--name", "PB"])
    assert code == cli.EXIT_OK
    env = gdf.build_document(gdf.parse_gdf(capsys.readouterr().out))
    assert len(env["PB"].g.arrows) == 8


def test_cmd_convert_roundtrip_byte_stable(capsys):
    run_cli(["convert", fixture("sc2.gdf"), "--name", "SC2",
             "--direction", "xmod2gpd"])
    first = capsys.readouterr().out
    run_cli(["convert", fixture("sc2.gdf"), "--name", "SC2",
             "--direction", "xmod2gpd"])
    second = capsys.readouterr().out
    assert first == second
    env = gdf.build_document(gdf.parse_gdf(first))
    assert len(env["SC2_2gpd"].g2) == 4


def test_cmd_convert_back(tmp_path, capsys):
    run_cli(["convert", fixture("sc2.gdf"), "--name", "SC2",
             "--direction", "xmod2gpd"])
    text = capsys.readouterr().out
    p = tmp_path / "tg.gdf"
    p.write_text(text)
    assert run_cli(["convert", str(p), "--name", "SC2_2gpd",
                    "--direction", "2gpd2xmod"]) == cli.EXIT_OK
    env = gdf.build_document(gdf.parse_gdf(capsys.readouterr().out))
    back = env["SC2_2gpd_xmod"]
    assert len(back.h.arrows) == 2


def test_cmd_convert_invalid_input_fails_check_first(tmp_path, capsys):
    p = tmp_path / "bad.gdf"
    with open(fixture("sc2.gdf")) as fh:
        text = fh.read()
    # corrupt the base groupoid's composition: c1.c1=c1 breaks inverses
    p.write_text(text.replace("comp: c0.c0=c0 c0.c1=c1 c1.c0=c1 c1.c1=c0",
                              "comp: c0.c0=c0 c0.c1=c1 c1.c0=c1 c1.c1=c1", 1))
    assert run_cli(["convert", str(p), "--name", "SC2",
                    "--direction", "xmod2gpd"]) == cli.EXIT_VALIDATION


def test_cmd_decompose(capsys):
    assert run_cli(["decompose", fixture("osc2.gdf"),
                    "--name", "OSC2"]) == cli.EXIT_OK
    env = gdf.build_document(gdf.parse_gdf(capsys.readouterr().out))
    assert "OSC2_Gprime" in env


def test_cmd_enumerate_counts(capsys):
    assert run_cli(["enumerate-extensions", "--group", "Z2",
                    "--module", "Z2", "--cross-check"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "# 2 Morita classes" in out
    assert "inequivalent" in out
    assert run_cli(["enumerate-extensions", "--group", "Z2",
                    "--module", "Z3"]) == cli.EXIT_OK
    assert "# 1 Morita classes" in capsys.readouterr().out


def test_cmd_enumerate_trivial_group(capsys):
    assert run_cli(["enumerate-extensions", "--group", "Z1",
                    "--module", "Z3"]) == cli.EXIT_OK
    assert "# 1 Morita classes" in capsys.readouterr().out


def test_cmd_morita_witness(tmp_path, capsys):
    g = fingrpd.pair_groupoid(["x", "y"])
    h = fingrpd.unit_groupoid(["u"])
    blocks = [gdf.groupoid_block("A", g), gdf.groupoid_block("B", h)]
    p = tmp_path / "mw.gdf"
    p.write_text(gdf.print_gdf(gdf.document_of(blocks)))
    assert run_cli(["morita-witness", str(p), "--left", "A",
                    "--right", "B"]) == cli.EXIT_OK
    env = gdf.build_document(gdf.parse_gdf(capsys.readouterr().out))
    assert "witness" in env


def test_cmd_morita_witness_negative(tmp_path, capsys):
    g = fingrpd.cyclic_groupoid(4)
    klein = fingrpd.semidirect_product(fingrpd.trivial_action(
        fingrpd.cyclic_groupoid(2),
        fingrpd.as_group_bundle(fingrpd.cyclic_groupoid(2, prefix="h"))))
    blocks = [gdf.groupoid_block("A", g), gdf.groupoid_block("B", klein)]
    p = tmp_path / "mw2.gdf"
    p.write_text(gdf.print_gdf(gdf.document_of(blocks)))
    assert run_cli(["morita-witness", str(p), "--left", "A",
                    "--right", "B"]) == cli.EXIT_VALIDATION


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "xmodforge.cli", "check",
                           fixture("pair2.gdf")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "[PASS]" in proc.stdout


def test_zigzag_block_builds_and_folds(tmp_path):
    sc2 = xmod.inertia_xmod(fingrpd.cyclic_groupoid(2))
    blocks = gdf.xmod_blocks("SC2", sc2)
    blocks.append(gdf.Block("morphism", "chi", {
        "from": ["SC2"], "to": ["SC2"],
        "objects": ["*=*"],
        "left": ["c0=c0", "c1=c1"],
        "right": ["c0=c0", "c1=c1"]}, 0))
    blocks.append(gdf.Block("zigzag", "zz", {
        "modules": ["SC2", "SC2"], "arrows": ["chi"], "dirs": ["fwd"]}, 0))
    text = gdf.print_gdf(gdf.document_of(blocks))
    p = tmp_path / "zz.gdf"
    p.write_text(text)
    env = gdf.build_document(gdf.parse_gdf(text))
    folded = cr.zigzag_to_xext(env["zz"])
    assert folded.is_extension
    assert run_cli(["check", str(p)]) == cli.EXIT_OK


def test_zigzag_block_rejects_non_hypercover(tmp_path):
    sc2 = xmod.inertia_xmod(fingrpd.cyclic_groupoid(2))
    extra = fingrpd.disjoint_union(sc2.g, fingrpd.unit_groupoid(["y"]))
    big = xmod.inertia_xmod(extra)
    blocks = gdf.xmod_blocks("SC2", sc2) + gdf.xmod_blocks("BIG", big)
    blocks.append(gdf.Block("morphism", "chi", {
        "from": ["SC2"], "to": ["BIG"],
        "objects": ["*=(A,*)"],
        "left": ["c0=(A,c0)", "c1=(A,c1)"],
        "right": ["c0=(A,c0)", "c1=(A,c1)"]}, 0))
    blocks.append(gdf.Block("zigzag", "zz", {
        "modules": ["SC2", "BIG"], "arrows": ["chi"], "dirs": ["fwd"]}, 0))
    p = tmp_path / "zz2.gdf"
    p.write_text(gdf.print_gdf(gdf.document_of(blocks)))
    assert run_cli(["check", str(p)]) == cli.EXIT_VALIDATION
