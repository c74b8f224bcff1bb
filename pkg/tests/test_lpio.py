import math

import pytest

from milpheur.core import BINARY, GE, INTEGER, LE, MilpInstance, VariableDef, LinearConstraint, semantically_equal
from milpheur.lpio import (
    LpSyntaxError,
    instance_from_json_dict,
    instance_to_json_dict,
    parse_lp_file,
    write_lp_file,
)


def test_parse_minimal_binary_model():
    text = """
    Minimize obj: x + 2 y
    Subject To
      c1: x + y >= 1
    Binaries
      x y
    End
    """
    inst = parse_lp_file(text)
    assert inst.n_vars == 2 and inst.n_cons == 1
    assert all(v.integrality == BINARY for v in inst.variables)
    con = inst.constraints[0]
    assert con.sense == GE and con.rhs == 1.0
    assert dict(inst.objective) == {0: 1.0, 1: 2.0}


def test_parse_sos_section():
    text = """
    Minimize obj: x1 + x2
    Subject To
      c1: x1 + x2 <= 1
    SOS
      S1:: x1:1 x2:2
    End
    """
    inst = parse_lp_file(text)
    sos = [c for c in inst.constraints if c.is_sos1]
    assert len(sos) == 1
    assert sos[0].sos1_group is not None
    assert [w for _, w in sos[0].terms] == [1.0, 2.0]


def test_parse_named_sos_sets():
    text = """
    Minimize obj: x + y + z
    Subject To
      c1: x + y + z <= 2
    SOS
      s1: S1:: x:1 y:2
      s2: S1:: y:1 z:2
    End
    """
    inst = parse_lp_file(text)
    sos = [c for c in inst.constraints if c.is_sos1]
    assert [c.sos1_group for c in sos] == ["s1", "s2"]


def test_malformed_expression_reports_token():
    with pytest.raises(LpSyntaxError) as err:
        parse_lp_file("Minimize obj: x\nSubject To\n c: x + >= 1\nEnd")
    assert ">=" in str(err.value)


def test_unknown_section_rejected():
    with pytest.raises(LpSyntaxError):
        parse_lp_file("Minimize obj: x\nRanges\n r1: x <= 4\nEnd")


def test_duplicate_bound_rejected():
    text = "Minimize obj: x\nSubject To\n c: x >= 1\nBounds\n x <= 4\n x <= 5\nEnd"
    with pytest.raises(LpSyntaxError) as err:
        parse_lp_file(text)
    assert "duplicate" in str(err.value)


def test_maximize_negated_with_offset():
    inst = parse_lp_file("Maximize obj: 3 x + 7\nSubject To\n c: x <= 4\nEnd")
    assert dict(inst.objective) == {0: -3.0}
    assert inst.offset == -7.0


def test_bounds_forms():
    text = """
    Minimize obj: a + b + c + d
    Subject To
      c1: a + b + c + d >= 0
    Bounds
      -2 <= a <= 8
      b >= 3
      c free
      d = 2.5
    End
    """
    inst = parse_lp_file(text)
    by_name = {v.name: v for v in inst.variables}
    assert (by_name["a"].lower, by_name["a"].upper) == (-2.0, 8.0)
    assert by_name["b"].lower == 3.0 and by_name["b"].upper == math.inf
    assert by_name["c"].lower == -math.inf and by_name["c"].upper == math.inf
    assert (by_name["d"].lower, by_name["d"].upper) == (2.5, 2.5)


def test_unnamed_constraints_get_names():
    inst = parse_lp_file("Minimize obj: x\nSubject To\n x >= 1\n x <= 9\nEnd")
    assert len({c.name for c in inst.constraints}) == 2


def test_roundtrip_free_variable_bound_style():
    inst = MilpInstance(
        name="free",
        variables=(VariableDef("v", -math.inf, math.inf),),
        constraints=(LinearConstraint("c", ((0, 1.0),), GE, -5.0),),
        objective=((0, 1.0),),
    )
    text = write_lp_file(inst)
    assert "-inf <= v <= +inf" in text
    assert semantically_equal(inst, parse_lp_file(text))


def test_roundtrip_empty_constraint_section():
    inst = MilpInstance(name="empty", variables=(VariableDef("x", 0.0, 4.0),), constraints=(), objective=((0, 1.5),))
    text = write_lp_file(inst)
    assert "Subject To" in text
    assert semantically_equal(inst, parse_lp_file(text))


def test_roundtrip_mixed_instance():
    inst = MilpInstance(
        name="mix",
        variables=(
            VariableDef("x", 0.0, 1.0, BINARY),
            VariableDef("n", -3.0, 11.0, INTEGER),
            VariableDef("w", 0.25, 0.75),
        ),
        constraints=(
            LinearConstraint("r1", ((0, 2.5), (1, -1.0)), LE, 4.5),
            LinearConstraint("r2", ((1, 1.0), (2, 3.0)), GE, -1.25),
            LinearConstraint("grp", ((0, 1.0), (2, 2.0)), sos1_group="grp"),
        ),
        objective=((0, -1.0), (2, 0.125)),
        offset=2.5,
    )
    assert semantically_equal(inst, parse_lp_file(write_lp_file(inst)))


def test_roundtrip_exact_floats():
    ugly = 0.1 + 0.2  # not representable cleanly
    inst = MilpInstance(
        name="f",
        variables=(VariableDef("x", 0.0, ugly),),
        constraints=(LinearConstraint("c", ((0, ugly),), LE, ugly),),
        objective=((0, ugly),),
    )
    back = parse_lp_file(write_lp_file(inst))
    assert back.variables[0].upper == ugly
    assert back.constraints[0].rhs == ugly
    assert dict(back.objective)[0] == ugly


def test_json_roundtrip_exact():
    inst = MilpInstance(
        name="j",
        variables=(VariableDef("x", -math.inf, 0.3),),
        constraints=(LinearConstraint("c", ((0, 1.0),), LE, 0.3, None),),
        objective=((0, 0.7),),
        offset=-1.5,
    )
    back = instance_from_json_dict(instance_to_json_dict(inst))
    assert back == inst
