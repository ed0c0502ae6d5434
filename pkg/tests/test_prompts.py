import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import load_drugs
from validmol.prompts import (
    ABLATIONS,
    InvalidInput,
    PromptTemplate,
    PromptVersion,
    TemplateError,
    ablation_template,
    builtin_templates,
    get_template,
    load_template,
    render_prompt,
)
from validmol.response_parser import Protocol, check_format, parse_bullets, render_bullets

DRUGS = [s for s, _ in load_drugs()]


def test_builtin_bodies():
    t = builtin_templates()
    assert "You are a chemists' assistant." in t[PromptVersion.V1].body
    assert "You *MUST NOT* increase the toxicity" in t[PromptVersion.V4].body
    assert '"step_type": "reaction"' in t[PromptVersion.V5].body


def test_protocols():
    t = builtin_templates()
    assert t[PromptVersion.V1].protocol is Protocol.FREEFORM
    assert {t[v].protocol for v in (PromptVersion.V2, PromptVersion.V3, PromptVersion.V4)} == {Protocol.BULLETS}
    assert t[PromptVersion.V5].protocol is Protocol.JSON


def test_render_v4():
    out = render_prompt(get_template("V4"), "CCO", "increase aqueous solubility")
    assert out.count("CCO") == 1
    assert "increase aqueous solubility" in out
    assert "You *MUST NOT* increase the toxicity" in out
    assert "[SMILES]" not in out and "[OBJECTIVE]" not in out


def test_render_rejects_invalid_input():
    with pytest.raises(InvalidInput):
        render_prompt(get_template("V4"), "C1CC(", "x")
    with pytest.raises(InvalidInput):
        render_prompt(get_template("V4"), "CCO", "  ")


def test_render_v2_keeps_escaped_output_slots():
    out = render_prompt(get_template("v2"), "CCO", "improve binding affinity")
    assert "Format your answer as:" in out
    assert "Starting molecule: [SMILES]" in out  # escaped slot survives as literal text
    assert out.count("CCO") == 1


@given(st.sampled_from(DRUGS), st.sampled_from(DRUGS), st.sampled_from(list(PromptVersion)[:5]))
def test_render_is_injective_in_smiles(a, b, version):
    t = get_template(version)
    ra, rb = render_prompt(t, a, "obj"), render_prompt(t, b, "obj")
    assert (ra == rb) == (a == b)
    assert ra.count(a) >= 1


def test_v4_output_format_matches_parser():
    # the example bullets of the template, with placeholders filled, are adherent
    body = get_template("V4").body
    example = [line for line in body.splitlines() if line.startswith("* ")]
    assert len(example) == 7
    items = parse_bullets("\n".join(example))
    filled = ["CCO" if i % 2 == 0 else item for i, item in enumerate(items)]
    assert check_format(render_bullets(filled)).adherent


@pytest.mark.parametrize("name", ABLATIONS)
def test_ablations_load_and_render(name):
    t = ablation_template(name)
    assert t.version is PromptVersion.CUSTOM
    assert "CCO" in render_prompt(t, "CCO", "objective")
    assert t.body != get_template("V4").body
    assert get_template(name).body == t.body


def test_ablations_remove_their_component():
    v4 = get_template("V4").body
    assert "You *MUST NOT*" in v4 and "You *MUST NOT*" not in ablation_template("no_constraints").body
    assert not ablation_template("no_role").body.startswith("You are")
    assert "bullet list" not in ablation_template("no_format").body


def test_placeholder_contract():
    with pytest.raises(TemplateError):
        PromptTemplate(PromptVersion.CUSTOM, "only [SMILES]", Protocol.BULLETS)
    with pytest.raises(TemplateError):
        PromptTemplate(PromptVersion.CUSTOM, "[SMILES] [SMILES] [OBJECTIVE]", Protocol.BULLETS)


def test_custom_template_file(tmp_path):
    path = tmp_path / "mine.txt"
    path.write_text("Molecule [SMILES], goal [OBJECTIVE].\n")
    t = load_template(path)
    assert t.version is PromptVersion.CUSTOM and t.name == "mine"
    assert render_prompt(t, "CCO", "more polar") == "Molecule CCO, goal more polar."
    assert get_template(str(path)).body == t.body
