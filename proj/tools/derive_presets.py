#!/usr/bin/env python3
"""Derive ModelProfile presets from the reference architecture definitions.

Layer gradient sizes come from instantiating the torchvision / transformers
models on the meta device (no weights are allocated) and listing every
parameter tensor in registration order, which is the order DDP uses when it
assigns gradients to buckets (in reverse).

Timing fields are calibration inputs, not measurements; see CALIBRATION.

Usage: tools/derive_presets.py [--out presets]
"""

import argparse
import json
import pathlib

MIB = 1 << 20

# per_device_batch and input bytes per sample follow the evaluated training
# setups.  forward/backward seconds are back-solved against the simulator's
# default TimingModel (tools/calibrate_presets.py prints the solve).
CALIBRATION = {
    "resnet50": dict(batch=1024, input_bytes=29184, forward=0.041602, backward=0.083204),
    "resnet101": dict(batch=1024, input_bytes=29184, forward=0.143951, backward=0.287901),
    "bert-base": dict(batch=128, input_bytes=3 * 128 * 8, forward=0.099643, backward=0.199286),
    "bert-large": dict(batch=128, input_bytes=3 * 128 * 8, forward=0.266178, backward=0.532356),
    "gpt2-large": dict(batch=1, input_bytes=2 * 1024 * 8, forward=0.069852, backward=0.139703),
    "gpt2-xl": dict(batch=1, input_bytes=2 * 1024 * 8, forward=0.117897, backward=0.235794),
}


def build_models():
    import torch
    import torchvision
    from transformers import (BertConfig, BertForSequenceClassification,
                              GPT2Config, GPT2LMHeadModel)

    with torch.device("meta"):
        return {
            "resnet50": (torchvision.models.resnet50(),
                         "torchvision.models.resnet50()"),
            "resnet101": (torchvision.models.resnet101(),
                          "torchvision.models.resnet101()"),
            "bert-base": (BertForSequenceClassification(BertConfig()),
                          "transformers BertForSequenceClassification(BertConfig())"),
            "bert-large": (BertForSequenceClassification(BertConfig(
                hidden_size=1024, num_hidden_layers=24, num_attention_heads=16,
                intermediate_size=4096)),
                "transformers BertForSequenceClassification(hidden=1024, layers=24, heads=16, ffn=4096)"),
            "gpt2-large": (GPT2LMHeadModel(GPT2Config(n_embd=1280, n_layer=36, n_head=20)),
                           "transformers GPT2LMHeadModel(n_embd=1280, n_layer=36, n_head=20)"),
            "gpt2-xl": (GPT2LMHeadModel(GPT2Config(n_embd=1600, n_layer=48, n_head=25)),
                        "transformers GPT2LMHeadModel(n_embd=1600, n_layer=48, n_head=25)"),
        }


def profile(name, model, definition, calib):
    layers = [{"name": n, "bytes": p.numel() * 4} for n, p in model.named_parameters()]
    total = sum(p.numel() for p in model.parameters())
    return {
        "name": name,
        "derivation": {
            "tag": "derived",
            "script": "tools/derive_presets.py",
            "definition": definition,
            "note": "layer sizes are fp32 gradient bytes per parameter tensor, front-to-back",
        },
        "calibration": "forward/backward seconds and input_bytes_per_sample are back-solved "
                       "calibration values, not measurements",
        "total_params": total,
        "per_device_batch": calib["batch"],
        "input_bytes_per_sample": calib["input_bytes"],
        "forward_time_s": calib["forward"],
        "backward_time_s": calib["backward"],
        "bucket_cap_default_bytes": 25 * MIB,
        "first_bucket_bytes": 1 * MIB,
        "layers": layers,
    }


def dump(p):
    # one layer per line keeps the files diffable without indent bloat
    head = {k: v for k, v in p.items() if k != "layers"}
    text = json.dumps(head, indent=2)[:-2]
    rows = ",\n".join("    " + json.dumps(l) for l in p["layers"])
    return text + ',\n  "layers": [\n' + rows + "\n  ]\n}\n"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "presets"))
    ap.add_argument("--calibration", help="JSON file overriding CALIBRATION entries")
    args = ap.parse_args()
    calib = dict(CALIBRATION)
    if args.calibration:
        for k, v in json.loads(pathlib.Path(args.calibration).read_text()).items():
            calib[k] = {**calib[k], **v}
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (model, definition) in build_models().items():
        p = profile(name, model, definition, calib[name])
        (out / f"{name}.json").write_text(dump(p))
        print(f"{name}: {len(p['layers'])} tensors, {p['total_params']} params")


if __name__ == "__main__":
    main()
