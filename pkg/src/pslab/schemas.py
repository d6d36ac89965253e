"""JSON Schemas for the CLI's ``--output json`` documents."""

RATIONAL = {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}
ORDER = {"type": "array", "items": {"type": "integer", "minimum": 0}}
PROFILE = {"type": "array", "items": ORDER}
MATRIX = {"type": "array", "items": {"type": "array", "items": RATIONAL}}

_verdict = {
    "type": "object",
    "required": ["is_pne", "witness"],
    "properties": {
        "is_pne": {"type": "boolean"},
        "witness": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["agent", "report"],
                    "properties": {"agent": {"type": "integer", "minimum": 1}, "report": ORDER},
                },
            ]
        },
    },
}

SCHEMAS = {
    "ps": {
        "type": "object",
        "required": ["assignment"],
        "properties": {
            "assignment": MATRIX,
            "trace": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["t", "finished"],
                    "properties": {"t": RATIONAL, "finished": ORDER},
                },
            },
        },
    },
    "best-response": {
        "type": "object",
        "required": ["agent", "relation", "order", "row", "improves"],
        "properties": {
            "agent": {"type": "integer", "minimum": 1},
            "relation": {"enum": ["eu", "dl"]},
            "order": ORDER,
            "row": {"type": "array", "items": RATIONAL},
            "value": RATIONAL,
            "improves": {"type": "boolean"},
        },
    },
    "dynamics": {
        "type": "object",
        "required": ["terminal", "trajectory", "steps"],
        "properties": {
            "terminal": {"enum": ["fixed_point", "cycle", "max_steps"]},
            "trajectory": {"type": "array", "items": PROFILE},
            "start_index": {"type": ["integer", "null"]},
            "period": {"type": ["integer", "null"]},
            "steps": {"type": "integer"},
            "seed": {"type": ["integer", "null"]},
        },
    },
    "verify": _verdict,
    "enumerate": {
        "type": "object",
        "required": ["profiles", "equilibria"],
        "properties": {
            "profiles": {"type": "integer"},
            "sw_truthful": {"type": ["string", "null"]},
            "equilibria": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["profile_id", "profile", "assignment"],
                    "properties": {
                        "profile_id": {"type": "integer"},
                        "profile": PROFILE,
                        "assignment": MATRIX,
                        "sw": {"type": ["string", "null"]},
                        "class": {"type": ["string", "null"]},
                    },
                },
            },
        },
    },
    "spne": {
        "type": "object",
        "required": ["profile", "verdict", "quantum", "depth", "nodes"],
        "properties": {
            "profile": PROFILE,
            "verdict": _verdict,
            "quantum": RATIONAL,
            "depth": {"type": "integer"},
            "nodes": {"type": "integer"},
            "leaf": MATRIX,
        },
    },
    "threat": {
        "type": "object",
        "required": ["q1", "q2"],
        "properties": {
            "q1": ORDER,
            "q2": ORDER,
            "check": {
                "type": "object",
                "required": ["same_assignment", "dl_pne", "eu_pne", "falsified"],
                "properties": {
                    "same_assignment": {"type": "boolean"},
                    "dl_pne": {"type": "boolean"},
                    "eu_pne": {"type": "array", "items": {"type": "boolean"}},
                    "falsified": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
    },
    "selfcheck": {
        "type": "object",
        "required": ["checks", "ok"],
        "properties": {
            "ok": {"type": "boolean"},
            "checks": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "ok"],
                    "properties": {"name": {"type": "string"}, "ok": {"type": "boolean"}},
                },
            },
        },
    },
}
