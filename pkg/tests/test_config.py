import copy
import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmfeat.config import (
    ExtractionPlan,
    OverridePair,
    apply_overrides,
    parse_override,
    parse_yaml_config,
    plan_to_tree,
    validate_config,
)
from mmfeat.errors import ConfigError


def ov(token):
    return parse_override(token)


MINIMAL = {
    "dataset_path": "/d",
    "gpu_list": -1,
    "visual": {"items": {"input_folder": "img", "output_folder": "out", "model": [{"name": "m", "output_layers": ["fc1"]}]}},
}


class TestParse:
    def test_setup_entries(self):
        assert parse_yaml_config("dataset_path: ./data\ngpu_list: -1") == {"dataset_path": "./data", "gpu_list": -1}

    def test_nested(self):
        assert parse_yaml_config("a:\n  b: [1, 2]") == {"a": {"b": [1, 2]}}

    def test_quoted_stays_string(self):
        assert parse_yaml_config("gpu_list: '-1'") == {"gpu_list": "-1"}

    @pytest.mark.parametrize("text", ["", "- 1\n- 2", "just text"])
    def test_non_mapping_root(self, text):
        with pytest.raises(ConfigError, match="mapping"):
            parse_yaml_config(text)

    def test_syntax_error_has_position(self):
        with pytest.raises(ConfigError, match=r"line 2, column \d+"):
            parse_yaml_config("a: 1\nb: c: d\n")

    def test_duplicate_keys_after_trim(self):
        with pytest.raises(ConfigError, match="duplicate key"):
            parse_yaml_config("visual: {}\n'visual ': {}\n")


class TestOverrides:
    def test_replace_leaf(self):
        root = {"visual": {"items": {"output_folder": "a"}}}
        assert apply_overrides(root, [ov("visual.items.output_folder=b")]) == {"visual": {"items": {"output_folder": "b"}}}

    def test_creates_path(self):
        assert apply_overrides({}, [ov("x.y=1")]) == {"x": {"y": "1"}}

    def test_last_write_wins(self):
        assert apply_overrides({}, [ov("k=1"), ov("k=2")]) == {"k": "2"}

    def test_value_may_contain_equals(self):
        assert apply_overrides({}, [ov("a=b=c")]) == {"a": "b=c"}

    def test_traversing_scalar_names_prefix(self):
        with pytest.raises(ConfigError, match="'a.b'"):
            apply_overrides({"a": {"b": 3}}, [ov("a.b.c=1")])

    def test_traversing_list(self):
        with pytest.raises(ConfigError, match="list"):
            apply_overrides({"m": [{"name": "x"}]}, [ov("m.name=y")])

    def test_matches_messy_existing_key(self):
        root = {"Visual ": {"items": {"output_folder": "a"}}}
        out = apply_overrides(root, [ov("visual.items.output_folder=b")])
        assert out == {"Visual ": {"items": {"output_folder": "b"}}}

    def test_input_untouched(self):
        root = copy.deepcopy(MINIMAL)
        apply_overrides(root, [ov("visual.items.output_folder=zzz"), ov("new.key=1")])
        assert root == MINIMAL

    @pytest.mark.parametrize("token", ["noequals", "a..b=1", ".a=1", "a.=1", "=1"])
    def test_bad_tokens(self, token):
        with pytest.raises(ConfigError):
            parse_override(token)

    def test_empty_segment_pair(self):
        with pytest.raises(ConfigError):
            OverridePair(("a", ""), "1")


class TestValidate:
    def test_minimal(self):
        plan = validate_config(MINIMAL)
        assert plan.workers == 1 and not plan.skip_errors
        assert str(plan.registry_file) == "/d/registry.json"
        assert str(plan.log_path) == "/d/logs"
        (job,) = plan.jobs
        assert (job.modality, job.source, job.input_path, job.output_path) == ("visual", "items", "img", "out")
        assert job.models[0].backend == "toy" and job.models[0].output_layers == ("fc1",)

    @pytest.mark.parametrize("value, workers", [(-1, 1), ([-1], 1), ("-1", 1), ([0, 1, 3], 3), ("0,1", 2), ("[2]", 1)])
    def test_gpu_list(self, value, workers):
        assert validate_config({**MINIMAL, "gpu_list": value}).workers == workers

    @pytest.mark.parametrize("value", [[], [-1, 0], [-2], "gpu", [0, 0], True, {"a": 1}])
    def test_gpu_list_malformed(self, value):
        with pytest.raises(ConfigError):
            validate_config({**MINIMAL, "gpu_list": value})

    def test_missing_dataset_path(self):
        with pytest.raises(ConfigError, match="dataset_path"):
            validate_config({"gpu_list": -1})

    def test_missing_gpu_list(self):
        with pytest.raises(ConfigError, match="gpu_list"):
            validate_config({"dataset_path": "/d"})

    def test_single_model_mapping_wrapped(self):
        raw = copy.deepcopy(MINIMAL)
        raw["visual"]["items"]["model"] = {"name": "m", "output_layers": "fc1"}
        assert len(validate_config(raw).jobs[0].models) == 1

    def test_messy_keys(self):
        raw = {" Dataset_Path": "/d", "GPU_LIST ": "-1", "Visual ": {" ITEMS": {
            "Input_Folder": "i", "output_folder ": "o",
            "MODEL": [{"Name": "m", "Output_Layers": "a, b", "Reshape": "3,4", "backend": "tf"}]}}}
        plan = validate_config(raw)
        spec = plan.jobs[0].models[0]
        assert plan.jobs[0].modality == "visual"
        assert spec.output_layers == ("a", "b") and spec.reshape == (3, 4) and spec.backend == "tf"

    def test_string_coercions(self):
        raw = copy.deepcopy(MINIMAL)
        raw["skip_errors"] = "yes"
        raw["textual"] = {"items": {"input_folder": "t.tsv", "output_folder": "o",
                                    "model": {"name": "t", "output_layers": "x", "clear_text": "True", "task": "ner"}}}
        plan = validate_config(raw)
        assert plan.skip_errors is True
        assert plan.jobs[1].models[0].clear_text is True and plan.jobs[1].models[0].task == "ner"

    def test_unknown_keys_warn(self, caplog):
        raw = {**MINIMAL, "colour": "blue"}
        with caplog.at_level(logging.WARNING, logger="mmfeat"):
            plan = validate_config(raw)
        assert "colour" in caplog.text and any("colour" in w for w in plan.warnings)

    @pytest.mark.parametrize("missing", ["input_folder", "output_folder"])
    def test_missing_folder(self, missing):
        raw = copy.deepcopy(MINIMAL)
        del raw["visual"]["items"][missing]
        with pytest.raises(ConfigError, match=missing):
            validate_config(raw)

    @pytest.mark.parametrize("missing", ["name", "output_layers"])
    def test_model_missing_field(self, missing):
        raw = copy.deepcopy(MINIMAL)
        del raw["visual"]["items"]["model"][0][missing]
        with pytest.raises(ConfigError, match=missing):
            validate_config(raw)

    def test_no_models(self):
        raw = copy.deepcopy(MINIMAL)
        raw["visual"]["items"]["model"] = []
        with pytest.raises(ConfigError):
            validate_config(raw)

    def test_duplicate_output_layers(self):
        raw = copy.deepcopy(MINIMAL)
        raw["visual"]["items"]["model"][0]["output_layers"] = ["a", "a"]
        with pytest.raises(ConfigError, match="duplicates"):
            validate_config(raw)

    @pytest.mark.parametrize("reshape", [[0, 3], [3], "a,b"])
    def test_bad_reshape(self, reshape):
        raw = copy.deepcopy(MINIMAL)
        raw["visual"]["items"]["model"][0]["reshape"] = reshape
        with pytest.raises(ConfigError):
            validate_config(raw)

    def test_duplicate_section_is_error(self):
        raw = copy.deepcopy(MINIMAL)
        raw["visual"]["Items "] = raw["visual"]["items"]
        with pytest.raises(ConfigError, match="more than once"):
            validate_config(raw)

    def test_no_modalities_empty_plan(self):
        assert validate_config({"dataset_path": "/d", "gpu_list": -1}).jobs == ()

    def test_inapplicable_fields_warn(self, caplog):
        raw = copy.deepcopy(MINIMAL)
        raw["visual"]["items"]["model"][0]["clear_text"] = True
        with caplog.at_level(logging.WARNING, logger="mmfeat"):
            spec = validate_config(raw).jobs[0].models[0]
        assert spec.clear_text is False and "clear_text" in caplog.text


# -- properties ---------------------------------------------------------------

names = st.text("abcdefgh", min_size=1, max_size=5)
model_st = st.fixed_dictionaries(
    {"name": names, "output_layers": st.lists(names, min_size=1, max_size=3, unique=True)},
    optional={"backend": names, "task": names, "clear_text": st.booleans(),
              "reshape": st.tuples(st.integers(1, 9), st.integers(1, 9)).map(list)},
)
section_st = st.fixed_dictionaries(
    {"input_folder": names, "output_folder": names, "model": st.lists(model_st, min_size=1, max_size=3)},
    optional={"text_column": names},
)
config_st = st.fixed_dictionaries(
    {
        "dataset_path": names,
        "gpu_list": st.one_of(st.just(-1), st.lists(st.integers(0, 7), min_size=1, max_size=4, unique=True)),
    },
    optional={
        "skip_errors": st.booleans(),
        "model_registry": names,
        "visual": st.dictionaries(st.sampled_from(["items", "interactions"]), section_st, min_size=1),
        "audio": st.dictionaries(st.sampled_from(["items", "interactions"]), section_st, min_size=1),
        "textual": st.dictionaries(st.sampled_from(["items", "interactions"]), section_st, min_size=1),
    },
)


def check_invariants(plan: ExtractionPlan):
    assert plan.workers >= 1
    pairs = [(j.modality, j.source) for j in plan.jobs]
    assert len(pairs) == len(set(pairs))
    for job in plan.jobs:
        assert job.models
        for spec in job.models:
            assert spec.output_layers and len(set(spec.output_layers)) == len(spec.output_layers)
            assert spec.reshape is None or min(spec.reshape) >= 1
            assert job.modality == "visual" or spec.reshape is None


@settings(max_examples=100, deadline=None)
@given(config_st)
def test_plan_invariants_and_idempotence(raw):
    plan = validate_config(raw)
    check_invariants(plan)
    assert validate_config(plan_to_tree(plan)) == plan
