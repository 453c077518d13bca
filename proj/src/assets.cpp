#include "midas/assets.hpp"

#include <mutex>

namespace midas::assets {

const std::string& get(const std::string& path) {
  const auto& table = embedded();
  auto it = table.find(path);
  if (it == table.end()) throw NotFound("unknown asset '" + path + "'");
  return it->second;
}

const std::string& prompt_template(std::string_view name) {
  return get("prompts/" + std::string(kVersion) + "/" + std::string(name) + ".txt");
}

const json& schema(std::string_view name) {
  static std::mutex mu;
  static std::map<std::string, json, std::less<>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(name);
  if (it == cache.end()) {
    const auto& text = get("schemas/" + std::string(kVersion) + "/" + std::string(name) + ".json");
    it = cache.emplace(std::string(name), json::parse(text)).first;
  }
  return it->second;
}

namespace {

bool placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_' || (c >= '0' && c <= '9'); }

std::string format_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += '\n';
      out += "- ";
      out += item.is_string() ? item.get<std::string>() : item.dump();
    }
    return out;
  }
  return v.dump();
}

}  // namespace

std::string render(std::string_view text, const json& vars) {
  std::string out;
  out.reserve(text.size() * 2);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && placeholder_char(text[j])) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}' && text[i + 1] >= 'a' && text[i + 1] <= 'z') {
        std::string name(text.substr(i + 1, j - i - 1));
        auto it = vars.find(name);
        if (it == vars.end()) throw InvalidInput("template placeholder {" + name + "} has no value");
        out += format_value(*it);
        i = j + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

}  // namespace midas::assets

namespace midas {

namespace {

bool type_matches(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

}  // namespace

std::optional<std::string> schema_violation(const json& value, const json& schema, const std::string& path) {
  auto fail = [&](const std::string& msg) { return std::optional<std::string>(path + ": " + msg); };

  if (auto t = schema.find("type"); t != schema.end()) {
    bool ok = false;
    if (t->is_string()) {
      ok = type_matches(value, t->get<std::string>());
    } else {
      for (const auto& alt : *t) ok = ok || type_matches(value, alt.get<std::string>());
    }
    if (!ok) return fail("expected " + (t->is_string() ? t->get<std::string>() : t->dump()));
  }
  if (auto e = schema.find("enum"); e != schema.end()) {
    if (std::find(e->begin(), e->end(), value) == e->end()) return fail("value not in " + e->dump());
  }
  if (value.is_string()) {
    if (auto m = schema.find("minLength"); m != schema.end()) {
      if (value.get<std::string>().size() < m->get<std::size_t>()) return fail("string is shorter than " + m->dump());
    }
  }
  if (value.is_number()) {
    if (auto m = schema.find("minimum"); m != schema.end() && value.get<double>() < m->get<double>()) {
      return fail("below minimum " + m->dump());
    }
    if (auto m = schema.find("maximum"); m != schema.end() && value.get<double>() > m->get<double>()) {
      return fail("above maximum " + m->dump());
    }
  }
  if (value.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && value.size() < m->get<std::size_t>()) {
      return fail("expected at least " + m->dump() + " items");
    }
    if (auto m = schema.find("maxItems"); m != schema.end() && value.size() > m->get<std::size_t>()) {
      return fail("expected at most " + m->dump() + " items");
    }
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (auto err = schema_violation(value[i], *items, path + "[" + std::to_string(i) + "]")) return err;
      }
    }
  }
  if (value.is_object()) {
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& key : *req) {
        if (!value.contains(key.get<std::string>())) return fail("missing required field \"" + key.get<std::string>() + "\"");
      }
    }
    auto props = schema.find("properties");
    for (auto it = value.begin(); it != value.end(); ++it) {
      if (props != schema.end() && props->contains(it.key())) {
        if (auto err = schema_violation(it.value(), (*props)[it.key()], path + "." + it.key())) return err;
      } else if (auto extra = schema.find("additionalProperties"); extra != schema.end() && extra->is_boolean() &&
                                                                      !extra->get<bool>()) {
        return fail("unexpected field \"" + it.key() + "\"");
      }
    }
  }
  return std::nullopt;
}

}  // namespace midas
