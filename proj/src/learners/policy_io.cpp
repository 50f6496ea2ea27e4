#include <json.hpp>

#include "prefdens/error.hpp"
#include "prefdens/io.hpp"
#include "prefdens/policy.hpp"

namespace prefdens {

std::string policy_to_json(const Policy& policy) {
  nlohmann::ordered_json head;
  head["schema"] = "prefdens.policy/1";
  head["kind"] = policy.kind();
  if (policy.has_grid()) {
    const GridDomain d = policy.grid_density().domain;
    head["domain"] = {{"lo", d.lo}, {"hi", d.hi}, {"n", d.n}};
  } else {
    head["domain"] = nullptr;
  }
  head["num_params"] = policy.num_params();
  if (const auto* mix = dynamic_cast<const MixturePolicy*>(&policy)) {
    nlohmann::ordered_json heads = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < mix->num_heads(); ++k)
      heads.push_back({{"kind", mix->head(k).kind()}, {"num_params", mix->head(k).num_params()}});
    head["heads"] = heads;
  }
  // Parameters are written by hand to get fixed 17-digit formatting.
  std::string text = head.dump(2);
  text.pop_back();  // closing brace
  while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
  text += ",\n  \"params\": [";
  const auto p = policy.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) text += ", ";
    if (i % 8 == 0) text += "\n    ";
    text += fmt_double(p[i]);
  }
  text += "\n  ]\n}\n";
  return text;
}

void policy_params_from_json(const std::string& text, Policy& policy) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("schema", "") != "prefdens.policy/1") throw Error("unsupported policy schema");
  if (j.at("kind").get<std::string>() != policy.kind())
    throw Error("policy kind mismatch: file has " + j.at("kind").get<std::string>() + ", target is " + policy.kind());
  const auto p = j.at("params").get<std::vector<double>>();
  if (p.size() != policy.num_params()) throw Error("policy parameter count mismatch");
  policy.set_params(p);
}

}  // namespace prefdens
