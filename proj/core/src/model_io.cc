/*
 * Copyright 2026 The monogami Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "monogami/booster.h"
#include "monogami/errors.h"

namespace monogami {

using nlohmann::json;

std::string ModelToJson(const TreeEnsemble& ens) {
  json sets = json::array();
  for (const auto& set : ens.constraints.interaction_sets()) sets.push_back(set);
  json trees = json::array();
  for (const Tree& tree : ens.trees) {
    json nodes = json::array();
    for (const TreeNode& node : tree.nodes) {
      if (node.is_leaf()) {
        nodes.push_back({{"leaf_value", node.value}});
      } else {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  const json doc = {
      {"base_score", ens.base_score},
      {"loss", ToString(ens.loss)},
      {"learning_rate", ens.learning_rate},
      {"constraints", {{"monotone", ens.constraints.monotone()}, {"interaction_sets", sets}}},
      {"trees", std::move(trees)},
  };
  return doc.dump();
}

namespace {

Tree TreeFromJson(const json& jtree, std::size_t num_features, std::size_t tree_index) {
  const std::string where = "tree " + std::to_string(tree_index);
  const json& jnodes = jtree.at("nodes");
  if (!jnodes.is_array() || jnodes.empty()) throw IoError(where + ": nodes must be a non-empty array");
  Tree tree;
  tree.nodes.resize(jnodes.size());
  std::vector<int> parents(jnodes.size(), 0);
  const int count = static_cast<int>(jnodes.size());
  for (int id = 0; id < count; ++id) {
    const json& jn = jnodes[id];
    TreeNode& node = tree.nodes[id];
    if (jn.contains("leaf_value")) {
      node.value = jn.at("leaf_value").get<double>();
      continue;
    }
    node.feature = jn.at("feature").get<int>();
    node.threshold = jn.at("threshold").get<double>();
    node.left = jn.at("left").get<int>();
    node.right = jn.at("right").get<int>();
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= num_features) {
      throw IoError(where + ": node " + std::to_string(id) + " splits on an unknown feature");
    }
    for (int child : {node.left, node.right}) {
      // Children after parents, each referenced once: a tree, topologically ordered.
      if (child <= id || child >= count || parents[child]++ != 0) {
        throw IoError(where + ": node " + std::to_string(id) + " has an invalid child index");
      }
    }
  }
  for (int id = 1; id < count; ++id) {
    if (parents[id] != 1) throw IoError(where + ": node " + std::to_string(id) + " is unreachable");
  }
  return tree;
}

}  // namespace

TreeEnsemble ModelFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("model JSON does not parse: ") + e.what());
  }
  try {
    TreeEnsemble ens;
    ens.base_score = doc.at("base_score").get<double>();
    ens.loss = LossKindFromString(doc.at("loss").get<std::string>());
    ens.learning_rate = doc.at("learning_rate").get<double>();
    const json& jc = doc.at("constraints");
    auto monotone = jc.at("monotone").get<std::vector<int>>();
    auto sets = jc.at("interaction_sets").get<std::vector<FeatureSet>>();
    ens.constraints = ConstraintSpec::FromSets(std::move(monotone), std::move(sets));
    const json& jtrees = doc.at("trees");
    for (std::size_t t = 0; t < jtrees.size(); ++t) {
      ens.trees.push_back(TreeFromJson(jtrees[t], ens.constraints.num_features(), t));
    }
    return ens;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed model JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid model constraints: ") + e.what());
  }
}

void SaveModel(const TreeEnsemble& ens, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << ModelToJson(ens) << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

TreeEnsemble LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ModelFromJson(ss.str());
}

}  // namespace monogami
