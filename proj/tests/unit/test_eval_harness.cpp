// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The SWiT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "swit/error.hpp"
#include "swit/eval_harness.hpp"
#include "swit/rng.hpp"

using namespace swit;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Dataset small_dataset(int users = 64) {
  ScenarioConfig c;
  c.num_users = users;
  c.num_scatterers = 4;
  c.array_rows = 1;
  c.array_cols = 2;
  c.seed = 21;
  return generate_dataset(c);
}

EncoderConfig small_encoder() {
  EncoderConfig e;
  e.token_width = 6;
  e.embed_dim = 8;
  e.num_heads = 2;
  e.mlp_ratio = 2;
  return e;
}

bool same_params(const ParamStore<float>& a, const ParamStore<float>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.entries()[i].value != b.entries()[i].value) return false;
  return true;
}

}  // namespace

TEST_SUITE("eval_harness") {
  TEST_CASE("metrics on hand-computed errors") {
    Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(5, 2);
    Eigen::MatrixXd pred(5, 2);
    pred << 1, 0, 0, 1, -1, 0, 0, -1, 3, 0;
    const auto r = metrics(pred, truth);
    CHECK(r.mae == doctest::Approx(1.4));
    CHECK(r.rmse == doctest::Approx(std::sqrt(2.6)));
    CHECK(r.p95 == doctest::Approx(1.0 + 0.8 * 2.0));

    Eigen::MatrixXd one(1, 2), zero = Eigen::MatrixXd::Zero(1, 2);
    one << 0, 2;
    const auto s = metrics(one, zero);
    CHECK(s.mae == doctest::Approx(2.0));
    CHECK(s.p95 == doctest::Approx(2.0));
    CHECK(s.rmse == doctest::Approx(2.0));

    const auto z = metrics(pred, pred);
    CHECK(z.mae == 0.0);
    CHECK(z.p95 == 0.0);
    CHECK(z.rmse == 0.0);

    CHECK_THROWS_AS(metrics(pred, zero), ShapeMismatch);
  }

  TEST_CASE("metrics are invariant to sample order") {
    Rng rng(3);
    const Eigen::MatrixXd a = random_matrix(rng, 50, 2);
    const Eigen::MatrixXd b = random_matrix(rng, 50, 2);
    std::vector<int> perm(50);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Eigen::MatrixXd pa(50, 2), pb(50, 2);
    for (int i = 0; i < 50; ++i) {
      pa.row(i) = a.row(perm[i]);
      pb.row(i) = b.row(perm[i]);
    }
    const auto r1 = metrics(a, b);
    const auto r2 = metrics(pa, pb);
    CHECK(r1.mae == doctest::Approx(r2.mae).epsilon(1e-14));
    CHECK(r1.p95 == r2.p95);
    CHECK(r1.rmse == doctest::Approx(r2.rmse).epsilon(1e-14));
  }

  TEST_CASE("percentile interpolates order statistics") {
    CHECK(percentile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
    CHECK(percentile({4, 1, 3, 2}, 0.0) == 1.0);
    CHECK(percentile({4, 1, 3, 2}, 1.0) == 4.0);
    CHECK(percentile({10}, 0.95) == 10.0);
  }

  TEST_CASE("stratified split keeps per-stratum proportions") {
    Rng rng(4);
    std::vector<std::uint32_t> strata(1003);
    for (auto& s : strata) s = static_cast<std::uint32_t>(rng.integer(0, 3));
    std::map<std::uint32_t, int> total;
    for (auto s : strata) ++total[s];
    const Split sp = stratified_split(strata, 800, 203, 9);
    CHECK(sp.train.size() == 800);
    CHECK(sp.test.size() == 203);
    std::vector<std::size_t> all = sp.train;
    all.insert(all.end(), sp.test.begin(), sp.test.end());
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(std::is_sorted(sp.train.begin(), sp.train.end()));
    std::map<std::uint32_t, int> in_train;
    for (auto i : sp.train) ++in_train[strata[i]];
    for (const auto& [s, n] : total) CHECK(std::abs(in_train[s] - n * 800.0 / 1003.0) <= 1.0);

    const Split again = stratified_split(strata, 800, 203, 9);
    CHECK(again.train == sp.train);
    const Split other = stratified_split(strata, 800, 203, 10);
    CHECK(other.train != sp.train);

    const Split small = stratified_split(strata, 256, 100, 1);
    std::map<std::uint32_t, int> small_train;
    for (auto i : small.train) ++small_train[strata[i]];
    for (const auto& [s, n] : total) CHECK(std::abs(small_train[s] - n * 256.0 / 1003.0) <= 1.0);
    CHECK_THROWS_AS(stratified_split(strata, 1000, 10, 1), InvalidArgument);
  }

  TEST_CASE("label scaling") {
    Eigen::MatrixXd y(3, 2);
    y << 1, 10, 2, 20, 3, 40;
    const auto sc = LabelScaler::fit(y);
    const auto s = sc.scale(y);
    CHECK(s.minCoeff() == 0.0);
    CHECK(s.maxCoeff() == 1.0);
    CHECK((sc.unscale(s) - y).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(4, 1, 2.0);
    CHECK_THROWS_AS(LabelScaler::fit(flat), InvalidArgument);
  }

  TEST_CASE("embedding extraction") {
    Dataset data = small_dataset(12);
    data.samples[7].channel = data.samples[2].channel;
    const auto enc = random_encoder(small_encoder(), 3);
    const Eigen::MatrixXd e = extract_embeddings(enc, data, 5);
    CHECK(e.rows() == 12);
    CHECK(e.cols() == 8);
    CHECK(e == extract_embeddings(enc, data, 5));
    CHECK((e - extract_embeddings(enc, data, 64)).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(e.row(7) == e.row(2));
    const std::vector<std::size_t> idx{3, 7};
    const Eigen::MatrixXd sub = extract_embeddings(enc, data, idx);
    CHECK((sub.row(0) - e.row(3)).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((sub.row(1) - e.row(7)).cwiseAbs().maxCoeff() < 1e-5);

    EncoderConfig wide = small_encoder();
    wide.token_width = 9;
    CHECK_THROWS_AS(extract_embeddings(random_encoder(wide, 1), data), ShapeMismatch);
  }

  TEST_CASE("linear probe fits a realizable target without touching the encoder") {
    Rng rng(5);
    const Eigen::MatrixXd x = random_matrix(rng, 600, 8);
    const Eigen::MatrixXd w = random_matrix(rng, 8, 2);
    Eigen::MatrixXd y = x * w;
    y.rowwise() += Eigen::RowVector2d(3.0, -1.0);
    EvalConfig cfg;
    cfg.weight_decay = 0.0;
    cfg.linear_epochs = 500;
    cfg.linear_batch = 32;
    const auto res = linear_probe(x.topRows(500), y.topRows(500), x.bottomRows(100), y.bottomRows(100), cfg);
    CHECK(res.report.mae < 1e-3);
    CHECK(res.epoch_losses.back() < res.epoch_losses.front());

    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(500, 1, 4.0);
    CHECK_THROWS_AS(linear_probe(x.topRows(500), flat, x.bottomRows(100), flat.topRows(100), cfg), InvalidArgument);
  }

  TEST_CASE("path-loss transfer on frozen features") {
    Dataset data = small_dataset(200);
    const auto enc = random_encoder(small_encoder(), 8);
    const ParamStore<float> before = enc.params;
    const Eigen::MatrixXd e = extract_embeddings(enc, data);
    Rng rng(6);
    const Eigen::VectorXd w = random_matrix(rng, 8, 1).col(0);
    for (std::size_t i = 0; i < data.size(); ++i)
      data.samples[i].pathloss_db = static_cast<float>(80.0 + e.row(static_cast<Eigen::Index>(i)).dot(w));
    EvalConfig cfg;
    cfg.weight_decay = 0.0;
    cfg.linear_epochs = 3000;
    cfg.linear_batch = 32;
    const auto res = pathloss_transfer(enc, data, cfg);
    CHECK(res.predictions.cols() == 1);
    CHECK(res.predictions.rows() == 40);
    double mean = 0.0, spread = 0.0;
    for (const auto& s : data.samples) mean += s.pathloss_db;
    mean /= static_cast<double>(data.size());
    for (const auto& s : data.samples) spread += std::abs(s.pathloss_db - mean);
    spread /= static_cast<double>(data.size());
    CHECK(res.report.mae < 0.1 * spread);
    CHECK(std::isfinite(res.report.p95));
    CHECK(std::isnan(res.report.top1));
    CHECK(same_params(before, enc.params));
  }

  TEST_CASE("k-NN classification") {
    Rng rng(7);
    const Eigen::MatrixXd train = random_matrix(rng, 40, 6);
    std::vector<std::uint32_t> labels(40);
    for (int i = 0; i < 40; ++i) labels[i] = static_cast<std::uint32_t>(i % 4);
    const Eigen::MatrixXd test = train.topRows(10);
    const std::vector<std::uint32_t> test_labels(labels.begin(), labels.begin() + 10);
    const auto r = knn_eval(train, labels, test, test_labels, 1, 4);
    CHECK(r.top1 == 100.0);
    CHECK(r.top5 == 100.0);
    CHECK(r.top5 >= r.top1);
    CHECK_THROWS_AS(knn_eval(train, labels, test, test_labels, 41, 4), InvalidArgument);
    CHECK_THROWS_AS(knn_eval(train, labels, test, test_labels, 0, 4), InvalidArgument);
  }

  TEST_CASE("k-NN on random embeddings sits at chance") {
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(100 + seed);
      const Eigen::MatrixXd train = random_matrix(rng, 2000, 16);
      const Eigen::MatrixXd test = random_matrix(rng, 1000, 16);
      std::vector<std::uint32_t> ltr(2000), lte(1000);
      for (auto& l : ltr) l = static_cast<std::uint32_t>(rng.integer(0, 3));
      for (auto& l : lte) l = static_cast<std::uint32_t>(rng.integer(0, 3));
      const auto r = knn_eval(train, ltr, test, lte, 20, 4);
      CHECK(r.top5 == 100.0);
      mean += r.top1 / 5.0;
    }
    CHECK(std::abs(mean - 25.0) <= 3.0);
  }

  TEST_CASE("fine-tuning trains encoder and head") {
    const Dataset data = small_dataset(160);
    const auto enc = random_encoder(small_encoder(), 4);
    EvalConfig cfg;
    cfg.mode = EvalMode::kFinetune;
    cfg.finetune_epochs = 10;
    cfg.finetune_batch = 32;
    cfg.head_hidden = 16;
    cfg.chunk_size = 16;
    const Split split = split_for(data, cfg);
    const auto res = fine_tune(enc, data, split, EvalTask::kLocation, cfg);
    REQUIRE(res.epoch_losses.size() == 10);
    // Three-epoch moving average never rises.
    for (std::size_t i = 3; i < res.epoch_losses.size(); ++i) {
      const double prev = (res.epoch_losses[i - 3] + res.epoch_losses[i - 2] + res.epoch_losses[i - 1]) / 3.0;
      const double cur = (res.epoch_losses[i - 2] + res.epoch_losses[i - 1] + res.epoch_losses[i]) / 3.0;
      CHECK(cur <= prev + 1e-9);
    }
    CHECK(res.predictions.rows() == static_cast<Eigen::Index>(split.test.size()));
    const auto again = fine_tune(enc, data, split, EvalTask::kLocation, cfg);
    CHECK(again.predictions == res.predictions);

    cfg.finetune_epochs = 0;
    const auto untrained = fine_tune(enc, data, split, EvalTask::kLocation, cfg);
    CHECK(untrained.epoch_losses.empty());
    CHECK(std::isfinite(untrained.report.mae));
    CHECK(untrained.report.mae > res.report.mae);
  }

  TEST_CASE("metrics CSV round trip") {
    MetricsReport a = empty_report();
    a.mae = 1.25;
    a.p95 = 2.5;
    a.rmse = 1.5;
    MetricsReport b = empty_report();
    b.top1 = 97.5;
    b.top5 = 100.0;
    const std::vector<ReportRow> rows{{"swit", "linear", "location", a}, {"random", "knn", "spot", b}};
    std::ostringstream out;
    write_metrics_csv(out, rows);
    CHECK(out.str().rfind("run,mode,task,mae,p95,rmse,top1,top5\n", 0) == 0);
    CHECK(out.str().find("random,knn,spot,,,,97.5,100\n") != std::string::npos);
    std::istringstream in(out.str());
    const auto back = read_metrics_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].metrics.mae == 1.25);
    CHECK(std::isnan(back[0].metrics.top1));
    CHECK(back[1].run == "random");
    std::ostringstream again;
    write_metrics_csv(again, back);
    CHECK(again.str() == out.str());

    std::ostringstream err;
    Eigen::MatrixXd p(1, 2), t(1, 2);
    p << 3, 4;
    t << 0, 0;
    const std::vector<std::size_t> idx{9};
    write_errors_csv(err, idx, p, t);
    CHECK(err.str() == "index,error,pred_0,pred_1,truth_0,truth_1\n9,5,3,4,0,0\n");
  }

  TEST_CASE("mode and task names") {
    CHECK(parse_eval_task("pathloss") == EvalTask::kPathloss);
    CHECK(std::string(eval_mode_name(EvalMode::kFinetune)) == "finetune");
    CHECK_THROWS(parse_eval_mode("nope"));
  }
}
