# SPDX-License-Identifier: Apache-2.0
#
# Copyright 2026 The SWiT Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import swit

SMALL = {
    "scenario.num_users": 48,
    "scenario.num_scatterers": 3,
    "scenario.array_rows": 1,
    "scenario.array_cols": 2,
    "scenario.num_subcarriers": 16,
    "seed": 7,
}

TINY_MODEL = {
    **SMALL,
    "encoder.embed_dim": 8,
    "encoder.max_positions": 37,
    "projector.hidden": 16,
    "projector.bottleneck": 8,
    "projector.global_prototypes": 32,
    "projector.local_prototypes": 16,
    "augment.num_local": 2,
    "augment.global1.target_length": 16,
    "augment.global2.target_length": 16,
    "augment.local.target_length": 8,
    "augment.local.crop_fraction": 0.25,
    "train.batch_size": 16,
    "train.epochs": 2,
    "train.warmup_epochs": 1,
}


def test_config_roundtrip_and_errors():
    cfg = swit.config({"train.batch_size": 64, "scenario.noiseless": True})
    assert cfg["train.batch_size"] == "64"
    assert cfg["scenario.noiseless"] == "true"
    assert set(cfg) == set(swit.config_keys())
    with pytest.raises(ValueError):
        swit.config({"no.such.key": 1})


def test_array_response_norm():
    a = swit.array_response(0.3, 1.1, 4, 4)
    assert a.shape == (16,)
    assert math.isclose(np.linalg.norm(a), 4.0, rel_tol=1e-12)
    assert np.allclose(np.abs(a), 1.0)


def test_dataset_generation_and_io(tmp_path):
    d = swit.generate_dataset(SMALL)
    assert len(d) == 48
    h = d.channels()
    assert h.shape == (48, 2, 16)
    assert np.iscomplexobj(h) and np.all(np.isfinite(h))
    assert d.positions().shape == (48, 3)
    assert set(d.spot_labels()) <= set(range(d.spot_count))
    path = tmp_path / "d.bin"
    d.save(path)
    e = swit.load_dataset(path)
    assert np.array_equal(e.channels(), h)
    assert np.array_equal(swit.generate_dataset(SMALL).channels(), h)
    with pytest.raises(OSError):
        swit.load_dataset(tmp_path / "missing.bin")


def test_pretrain_embed_knn(tmp_path):
    d = swit.generate_dataset(SMALL)
    enc, trace = swit.pretrain(d, TINY_MODEL, out_dir=tmp_path, max_steps=3)
    assert [t["step"] for t in trace] == [0, 1, 2]
    assert all(math.isfinite(t["L_SSL"]) for t in trace)
    assert (tmp_path / "encoder.ckpt").exists()
    z = enc.embed(d)
    assert z.shape == (48, 8)
    again = swit.load_encoder(tmp_path / "encoder.ckpt").embed(d)
    assert np.array_equal(z, again)
    _, trace2 = swit.pretrain(d, TINY_MODEL, max_steps=3)
    assert [t["L_SSL"] for t in trace2] == [t["L_SSL"] for t in trace]

    labels = np.asarray(d.spot_labels(), dtype=np.int64)
    top1, top5 = swit.knn_eval(z[:32], labels[:32], z[32:], labels[32:], k=5, num_classes=d.spot_count)
    assert 0.0 <= top1 <= top5 <= 100.0
    rnd = swit.random_encoder(d, TINY_MODEL)
    assert rnd.token_width == 6 and rnd.embed_dim == 8
