import math
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CELECOXIB, CELECOXIB_MOD, load_drugs
from validmol.llm_client import TransportConfig, TransportMode
from validmol.pathway import SynthesisPathway
from validmol.pipeline import DesignTask, Direction, Status, property_delta, run_task
from validmol.properties import property_profile
from validmol.report import compute_layout, depict_molecule, render_candidate, render_report
from validmol.smiles import canonical_smiles, mol_from_smiles

SVG = "{http://www.w3.org/2000/svg}"
XHTML = "{http://www.w3.org/1999/xhtml}"
DRUGS = [s for s, _ in load_drugs()]


def dist(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


def parse_xml(text):
    if text.startswith("<?xml"):
        text = text.encode()
    return ET.fromstring(text)


# ---- depiction ------------------------------------------------------------


def test_benzene_is_a_regular_hexagon():
    coords = compute_layout(mol_from_smiles("c1ccccc1")).coords
    cx = sum(p[0] for p in coords) / 6
    cy = sum(p[1] for p in coords) / 6
    radii = [dist(p, (cx, cy)) for p in coords]
    assert max(radii) - min(radii) < 1e-9
    sides = [dist(coords[i], coords[(i + 1) % 6]) for i in range(6)]
    assert max(sides) - min(sides) < 1e-9


def test_methane_is_one_labelled_glyph():
    root = parse_xml(depict_molecule(mol_from_smiles("C")))
    assert [t.text for t in root.iter(SVG + "text")] == ["CH4"]
    assert not list(root.iter(SVG + "line"))


def test_ethanol_layout():
    m = mol_from_smiles("CCO")
    coords = compute_layout(mol_from_smiles(canonical_smiles(m))).coords
    assert len(coords) == 3
    root = parse_xml(depict_molecule(m))
    labels = [t.text for t in root.iter(SVG + "text")]
    assert labels == ["OH"]
    assert len(list(root.iter(SVG + "line"))) == 2


def test_double_and_triple_bonds_are_parallel_lines():
    assert len(list(parse_xml(depict_molecule(mol_from_smiles("C=C"))).iter(SVG + "line"))) == 2
    assert len(list(parse_xml(depict_molecule(mol_from_smiles("C#C"))).iter(SVG + "line"))) == 3


def test_depiction_uses_canonical_form():
    assert depict_molecule(mol_from_smiles("OCC")) == depict_molecule(mol_from_smiles("CCO"))


@given(st.sampled_from(DRUGS))
def test_drug_depictions_are_well_formed(s):
    m = mol_from_smiles(s)
    svg = depict_molecule(m)
    assert svg == depict_molecule(m)
    root = parse_xml(svg)
    assert root.tag == SVG + "svg"
    layout = compute_layout(mol_from_smiles(canonical_smiles(m)))
    assert len(layout.coords) == len(m.atoms)
    if layout.overlaps:
        assert "overlap" in root.find(SVG + "title").text


# ---- report ---------------------------------------------------------------


def three_step():
    return SynthesisPathway.from_items([CELECOXIB, "Treatment with isopropyl iodide under basic conditions (K₂CO₃ in DMF)", CELECOXIB_MOD])


def profiles():
    return property_profile(mol_from_smiles(CELECOXIB)), property_profile(mol_from_smiles(CELECOXIB_MOD))


def test_three_step_pathway_has_two_images():
    start, final = profiles()
    doc = render_report(three_step(), start, final, 0.8)
    assert doc.step_count == 2 and len(doc.images) == 2
    root = parse_xml(doc.html)
    assert len(list(root.iter(SVG + "svg"))) == 2


def test_single_molecule_pathway():
    start, _ = profiles()
    doc = render_report(SynthesisPathway.from_items(["CCO"]), start, None)
    assert doc.step_count == 1
    assert 'class="properties"' in doc.html


def test_document_order_and_self_containment():
    start, final = profiles()
    doc = render_report(three_step(), start, final, 0.8)
    root = parse_xml(doc.html)
    body = root.find(XHTML + "body")
    kinds = [el.get("class") for el in body if el.get("class") in ("step", "reaction")]
    assert kinds == ["step", "reaction", "step"]
    for el in root.iter():
        for attr in ("src", "href"):
            assert attr not in el.attrib
    assert "<script" not in doc.html


def test_property_table_columns_and_deltas():
    start, final = profiles()
    deltas = [property_delta(250, 15, Direction.LOWER_IS_BETTER, "COX-2 IC50 (nM)")]
    doc = render_report(three_step(), start, final, 0.8, deltas)
    root = parse_xml(doc.html)
    headers = [th.text for th in root.iter(XHTML + "th")]
    for col in ("MW", "logP", "HBD", "HBA", "SA score", "Lipinski violations", "Tanimoto to start"):
        assert col in headers
    assert "16.7x" in doc.html


def test_special_characters_are_escaped():
    start, _ = profiles()
    pathway = SynthesisPathway.from_items(["CCO", "heat <150 °C & stir", "CC=O"])
    doc = render_report(pathway, start, None, objective="a < b")
    parse_xml(doc.html)
    assert "&lt;150" in doc.html


def test_celecoxib_report_is_deterministic(fixture_tasks, cassette):
    (entry,) = [t for t in fixture_tasks if t["name"] == "celecoxib"]
    cfg = TransportConfig(TransportMode.REPLAY, cassette_path=cassette)
    result = run_task(DesignTask.from_json(entry["task"]), cfg)
    assert result.status is Status.ACCEPTED
    a, b = render_candidate(result), render_candidate(result)
    assert a.html == b.html
    assert len(a.images) == 2
    assert CELECOXIB in a.html and CELECOXIB_MOD in a.html


def test_candidate_without_pathway_is_refused(fixture_tasks, cassette):
    result = run_task(DesignTask("C1CC(", "x"), TransportConfig(TransportMode.REPLAY, cassette_path=cassette))
    with pytest.raises(ValueError):
        render_candidate(result)
