/*
 * Copyright 2026 The sessrec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "sessrec/registry.hpp"

#include <stdexcept>

#include "sessrec/factorize.hpp"
#include "sessrec/gru.hpp"
#include "sessrec/neighbors.hpp"
#include "sessrec/rules.hpp"

namespace sessrec {

namespace {

using nlohmann::json;

void reject_unknown(const json& params,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : params.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::invalid_argument("unknown algorithm parameter: " + key);
    }
  }
}

KnnConfig knn_defaults(const std::string& name) {
  KnnConfig cfg;
  if (name == "sknn") {
    cfg.variant = KnnVariant::sknn;
    cfg.k = 500;
    cfg.m = 1000;
  } else if (name == "v-sknn") {
    cfg.variant = KnnVariant::v_sknn;
    cfg.k = 200;
    cfg.m = 2000;
  } else if (name == "s-sknn") {
    cfg.variant = KnnVariant::s_sknn;
    cfg.k = 100;
    cfg.m = 500;
  } else {
    cfg.variant = KnnVariant::sf_sknn;
    cfg.k = 100;
    cfg.m = 500;
  }
  return cfg;
}

std::unique_ptr<Recommender> make_knn(const std::string& name,
                                      const json& params) {
  reject_unknown(params, {"k", "m", "exclude_prefix_items"});
  KnnConfig cfg = knn_defaults(name);
  if (params.contains("k")) cfg.k = params["k"].get<std::size_t>();
  if (params.contains("m")) cfg.m = params["m"].get<std::size_t>();
  if (params.contains("exclude_prefix_items")) {
    cfg.exclude_prefix_items = params["exclude_prefix_items"].get<bool>();
  }
  return std::make_unique<KnnRecommender>(cfg);
}

FactorModelConfig factor_config(const std::string& name, const json& params,
                                std::uint64_t seed) {
  reject_unknown(params, {"d", "epochs", "lr", "reg", "negatives", "loss",
                          "init_scale", "alpha", "dropout", "skip",
                          "momentum"});
  FactorModelConfig cfg;
  cfg.seed = seed;
  if (name == "smf") {
    cfg.negatives = 128;
    cfg.loss = LossKind::top1_max;
  }
  if (params.contains("d")) cfg.d = params["d"].get<int>();
  if (params.contains("epochs")) cfg.epochs = params["epochs"].get<int>();
  if (params.contains("lr")) cfg.lr = params["lr"].get<double>();
  if (params.contains("reg")) cfg.reg = params["reg"].get<double>();
  if (params.contains("negatives")) {
    cfg.negatives = params["negatives"].get<int>();
  }
  if (params.contains("loss")) {
    cfg.loss = loss_kind_from_string(params["loss"].get<std::string>());
  }
  if (params.contains("init_scale")) {
    cfg.init_scale = params["init_scale"].get<double>();
  }
  if (params.contains("alpha")) cfg.alpha = params["alpha"].get<double>();
  if (params.contains("dropout")) cfg.dropout = params["dropout"].get<double>();
  if (params.contains("skip")) cfg.skip = params["skip"].get<double>();
  if (params.contains("momentum")) {
    cfg.momentum = params["momentum"].get<double>();
  }
  return cfg;
}

std::unique_ptr<Recommender> make_gru(const json& params,
                                      std::uint64_t seed) {
  reject_unknown(params, {"hidden", "batch", "epochs", "loss", "lr",
                          "dropout", "init_scale", "momentum"});
  GruConfig cfg;
  cfg.seed = seed;
  if (params.contains("hidden")) cfg.hidden = params["hidden"].get<int>();
  if (params.contains("batch")) cfg.batch = params["batch"].get<int>();
  if (params.contains("epochs")) cfg.epochs = params["epochs"].get<int>();
  if (params.contains("loss")) {
    cfg.loss = loss_kind_from_string(params["loss"].get<std::string>());
  }
  if (params.contains("lr")) cfg.lr = params["lr"].get<double>();
  if (params.contains("dropout")) cfg.dropout = params["dropout"].get<double>();
  if (params.contains("init_scale")) {
    cfg.init_scale = params["init_scale"].get<double>();
  }
  if (params.contains("momentum")) {
    cfg.momentum = params["momentum"].get<double>();
  }
  return std::make_unique<GruRecommender>(cfg);
}

}  // namespace

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {
      "ar",     "mc",      "sr",     "bpr-mf", "iknn",
      "sknn",   "v-sknn",  "s-sknn", "sf-sknn", "fpmc",
      "fism",   "fossil",  "smf",    "gru4rec"};
  return names;
}

std::unique_ptr<Recommender> make_recommender(const std::string& name,
                                              const nlohmann::json& params,
                                              std::uint64_t seed) {
  if (name == "ar") {
    reject_unknown(params, {});
    return std::make_unique<RuleRecommender>(RuleKind::ar);
  }
  if (name == "mc") {
    reject_unknown(params, {});
    return std::make_unique<RuleRecommender>(RuleKind::mc);
  }
  if (name == "sr") {
    reject_unknown(params, {});
    return std::make_unique<RuleRecommender>(RuleKind::sr);
  }
  if (name == "iknn") {
    reject_unknown(params, {});
    return std::make_unique<ItemKnnRecommender>();
  }
  if (name == "sknn" || name == "v-sknn" || name == "s-sknn" ||
      name == "sf-sknn") {
    return make_knn(name, params);
  }
  if (name == "bpr-mf") {
    return std::make_unique<BprMfModel>(factor_config(name, params, seed));
  }
  if (name == "fpmc") {
    return std::make_unique<FpmcModel>(factor_config(name, params, seed));
  }
  if (name == "fism") {
    return std::make_unique<FismModel>(factor_config(name, params, seed));
  }
  if (name == "fossil") {
    return std::make_unique<FossilModel>(factor_config(name, params, seed));
  }
  if (name == "smf") {
    return std::make_unique<SmfModel>(factor_config(name, params, seed));
  }
  if (name == "gru4rec") {
    return make_gru(params, seed);
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

}  // namespace sessrec
