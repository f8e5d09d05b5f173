"""JSON schema of run configurations (``curverecon <mode> --config file.json``)."""

_function = {"oneOf": [{"type": "number"}, {"type": "string", "minLength": 1}]}
_pos = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "curverecon-config-1.0",
    "title": "curverecon run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": "1.0"},
        "mode": {"enum": ["march", "pc", "pc-fixed-point", "verify", "converge", "demo"]},
        "preset": {"type": "string"},
        "solver": {"enum": ["march", "pc", "pc-fixed-point"]},
        "metric": {"oneOf": [
            {"type": "string"},
            {"type": "object", "required": ["preset"],
             "properties": {"preset": {"type": "string"}, "slant": {"type": "number"}}},
            {"type": "object", "required": ["g11", "g22", "g33"],
             "properties": {k: {"type": "string"} for k in ("g11", "g12", "g22", "g33", "name")}
             | {"lo": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
                "hi": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
                "lambda": {"type": "number"}},
             "additionalProperties": False},
        ]},
        "alpha": {"oneOf": [
            {"type": "number"}, {"type": "string", "minLength": 1},
            {"type": "object", "required": ["csv"], "properties": {"csv": {"type": "string"}},
             "additionalProperties": False},
        ]},
        "boundary": {"oneOf": [
            {"type": "object", "required": ["csv"], "properties": {"csv": {"type": "string"}},
             "additionalProperties": False},
            {"type": "object", "required": ["kbar1", "kbar2"],
             "properties": {"kbar1": _function, "kbar2": _function, "alpha0": _function,
                            "lambda": {"type": "number"}},
             "additionalProperties": False},
        ]},
        "ktilde": _function,
        "a1": _pos,
        "a": _pos,
        "dx": _pos,
        "K": _pos,
        "eps": _pos,
        "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "r": _pos,
        "scheme": {"enum": ["cir", "pc2"]},
        "strip_step": _pos,
        "T_weight": _pos,
        "tol": _pos,
        "max_iters": {"type": "integer", "minimum": 1},
        "steps_per_unit": {"type": "integer", "minimum": 2},
        "exact": {"oneOf": [
            {"type": "object", "required": ["kind", "c"],
             "properties": {"kind": {"const": "cylinder"}, "c": {"type": "number"}},
             "additionalProperties": False},
            {"type": "object", "required": ["kind", "R"],
             "properties": {"kind": {"const": "sphere"}, "R": _pos}, "additionalProperties": False},
        ]},
        "tolerances": {"type": "object", "additionalProperties": False,
                       "properties": {"k_rel": _pos, "angle": _pos, "exact": _pos, "umbilic": _pos}},
        "problem": {"type": "string"},
        "grids": {"type": "array", "items": _pos, "minItems": 3},
        "workers": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
    },
}
