#pragma once

#include <string_view>

namespace ssk {

/// Scenario configuration schema (mirrors configs/scenario.schema.json).
inline constexpr std::string_view kScenarioSchema = R"json({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "ssk scenario configuration",
  "type": "object",
  "additionalProperties": false,
  "required": ["model"],
  "properties": {
    "model": {"enum": ["acc", "unicycle", "planar", "scalar"]},
    "model_params": {"type": "object"},
    "certificate": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "family": {"enum": ["SRCBF", "SZCBF", "SCBF", "HO_SCBF", "HO_SZCBF"]},
        "gamma": {"type": "number", "exclusiveMinimum": 0},
        "alphas": {
          "type": "array",
          "maxItems": 4,
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["kind", "k"],
            "properties": {
              "kind": {"enum": ["linear", "power", "cubic"]},
              "k": {"type": "number", "exclusiveMinimum": 0},
              "exponent": {"type": "number", "exclusiveMinimum": 0}
            }
          }
        },
        "relative_degree": {"type": "integer", "minimum": 1, "maximum": 2},
        "ho_szcbf_uses_h1": {"type": "boolean"},
        "use_clf": {"type": "boolean"}
      }
    },
    "T": {"type": "number", "exclusiveMinimum": 0},
    "dt": {"type": "number", "exclusiveMinimum": 0},
    "trajectories": {"type": "integer", "minimum": 1},
    "seed": {"type": "integer", "minimum": 0},
    "control_box": {
      "type": ["object", "null"],
      "additionalProperties": false,
      "required": ["lo", "hi"],
      "properties": {
        "lo": {"type": "array", "items": {"type": ["number", "null"]}},
        "hi": {"type": "array", "items": {"type": ["number", "null"]}}
      }
    },
    "saturate_after": {"type": "boolean"},
    "stop_on_exit": {"type": "boolean"},
    "operating_region": {
      "type": "object",
      "additionalProperties": false,
      "required": ["lo", "hi"],
      "properties": {
        "lo": {"type": "array", "items": {"type": "number"}},
        "hi": {"type": "array", "items": {"type": "number"}}
      }
    },
    "init_sampling": {"enum": ["fixed", "uniform_disk"]},
    "sup_resolution": {"type": "integer", "minimum": 2, "maximum": 201},
    "sweep": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "sigmas": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "families": {"type": "array", "items": {"enum": ["SRCBF", "SZCBF", "SCBF", "HO_SCBF", "HO_SZCBF"]}},
        "points": {"type": "integer", "minimum": 0},
        "trajectories_per_point": {"type": "integer", "minimum": 1}
      }
    }
  },
  "definitions": {
    "acc_params": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "f0": {"type": "number"},
        "f1": {"type": "number"},
        "f2": {"type": "number"},
        "M": {"type": "number", "exclusiveMinimum": 0},
        "g": {"type": "number", "exclusiveMinimum": 0},
        "x_d": {"type": "number"},
        "tau": {"type": "number", "exclusiveMinimum": 0},
        "sigma1": {"type": "number", "minimum": 0},
        "sigma2": {"type": "number", "minimum": 0},
        "x0": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}
      }
    },
    "unicycle_params": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "v": {"type": "number"},
        "r": {"type": "number", "exclusiveMinimum": 0},
        "sigma1": {"type": "number", "minimum": 0},
        "sigma2": {"type": "number", "minimum": 0},
        "x0": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}
      }
    },
    "planar_params": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "r": {"type": "number", "exclusiveMinimum": 0},
        "drift_gain": {"type": "number"},
        "sigma1": {"type": "number", "minimum": 0},
        "sigma2": {"type": "number", "minimum": 0},
        "x0": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}
      }
    },
    "scalar_params": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "sigma": {"type": "number", "minimum": 0},
        "x0": {"type": "array", "minItems": 1, "maxItems": 1, "items": {"type": "number"}}
      }
    }
  }
}
)json";

}  // namespace ssk
