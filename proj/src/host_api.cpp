#include "gadgetforge/host_api.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gadgetforge/parser.h"

namespace gadgetforge {

using nlohmann::json;

std::string_view to_string(SinkMode mode) {
  switch (mode) {
    case SinkMode::Standard: return "standard";
    case SinkMode::NameMatched: return "name-matched";
    case SinkMode::Special: return "special";
  }
  return "?";
}

std::optional<SinkMode> sink_mode_from_string(std::string_view text) {
  for (auto m : {SinkMode::Standard, SinkMode::NameMatched, SinkMode::Special})
    if (to_string(m) == text) return m;
  return std::nullopt;
}

// ---- special-sink table ----

std::vector<SpecialRow> default_special_table() {
  const std::vector<std::vector<std::string>> groups = {{"shell", "env"},
                                                        {"shell", "NODE_OPTIONS"}};
  std::vector<SpecialRow> rows;
  for (const char* name : {"spawn", "spawnSync", "fork"})
    rows.push_back({"child_process", name,
                    {2, groups, "options of a spawned process resolve through the prototype"}});
  for (const char* name : {"exec", "execSync"})
    rows.push_back({"child_process", name,
                    {1, groups, "options of a shell command resolve through the prototype"}});
  return rows;
}

std::vector<SpecialRow> parse_special_table(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array())
    throw std::runtime_error("special-sink table must be a JSON array");
  std::vector<SpecialRow> rows;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("module") || !item.contains("name") ||
        !item.contains("argIndex") || !item.contains("groups"))
      throw std::runtime_error("special-sink row needs module, name, argIndex and groups");
    SpecialRow row;
    try {
      row.module = item.at("module").get<std::string>();
      row.name = item.at("name").get<std::string>();
      row.condition.arg_index = item.at("argIndex").get<int>();
      row.condition.groups = item.at("groups").get<std::vector<std::vector<std::string>>>();
      row.condition.description = item.value("description", "");
    } catch (const json::exception& e) {
      throw std::runtime_error(std::string("malformed special-sink row: ") + e.what());
    }
    if (row.condition.groups.empty() || row.condition.arg_index < 0)
      throw std::runtime_error("special-sink row " + row.module + "." + row.name +
                               " needs a non-negative argIndex and at least one group");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SpecialRow> load_special_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read special-sink table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_special_table(buf.str());
}

// ---- helpers ----

namespace {

const Value& arg(const std::vector<Value>& args, std::size_t i) {
  static const Value undefined = Undefined{};
  return i < args.size() ? args[i] : undefined;
}

Value resolve_option(Interpreter& interp, const Value& options, const std::string& key) {
  Object* o = as_object(options);
  if (!o) o = interp.root_prototype();
  return interp.lookup_property(*o, key).value;
}

// Options as the spawned process would see them, resolved through the
// prototype chain so that polluted defaults show up.
std::string options_summary(Interpreter& interp, const Value& options) {
  std::string out;
  Value shell = resolve_option(interp, options, "shell");
  if (!is_undefined(shell)) out += " shell=" + interp.display(shell, 1);
  // Without an env option the child inherits one built on the root prototype.
  Object* env = as_object(resolve_option(interp, options, "env"));
  if (!env) env = interp.root_prototype();
  Value node_options = interp.lookup_property(*env, "NODE_OPTIONS").value;
  if (!is_undefined(node_options)) out += " NODE_OPTIONS=" + interp.display(node_options, 1);
  return out;
}

Value canned_process(Interpreter& interp) {
  Object* r = interp.make_object();
  r->set_own("pid", 4242.0);
  r->set_own("status", 0.0);
  r->set_own("stdout", std::string());
  r->set_own("stderr", std::string());
  return r;
}

void log_effect(Interpreter& interp, const AstNode&, std::string module, std::string name,
                SinkCategory category, std::string text) {
  interp.append_effect(Effect{std::move(module), std::move(name), category, std::move(text)});
}

Value value_from_json(Interpreter& interp, const json& j) {
  switch (j.type()) {
    case json::value_t::null: return Null{};
    case json::value_t::boolean: return j.get<bool>();
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
    case json::value_t::number_float: return j.get<double>();
    case json::value_t::string: return j.get<std::string>();
    case json::value_t::array: {
      std::vector<Value> elements;
      for (const auto& e : j) elements.push_back(value_from_json(interp, e));
      return interp.make_array(std::move(elements));
    }
    case json::value_t::object: {
      Object* o = interp.make_object();
      for (const auto& [k, v] : j.items()) o->set_own(k, value_from_json(interp, v));
      return o;
    }
    default: return Undefined{};
  }
}

std::optional<json> value_to_json(Interpreter& interp, const Value& v, int depth) {
  if (depth > 32) return json(nullptr);
  return std::visit(
      [&](const auto& x) -> std::optional<json> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Undefined>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Null>) {
          return json(nullptr);
        } else if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::string>) {
          return json(x);
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) return json(nullptr);
          if (x == std::trunc(x) && std::abs(x) < 9e15) return json(static_cast<std::int64_t>(x));
          return json(x);
        } else if constexpr (std::is_same_v<T, Object*>) {
          if (x->callable()) return std::nullopt;
          if (x->kind == ObjectKind::Array) {
            json arr = json::array();
            for (const auto& e : x->elements) {
              auto j = value_to_json(interp, e, depth + 1);
              arr.push_back(j ? *j : json(nullptr));
            }
            return arr;
          }
          json obj = json::object();
          for (const auto& [k, pv] : x->props)
            if (auto j = value_to_json(interp, pv, depth + 1)) obj[k] = *j;
          return obj;
        } else {
          return value_to_json(interp, x->underlying, depth);
        }
      },
      v);
}

std::string format_text(Interpreter& interp, const std::vector<Value>& args) {
  std::string out;
  std::size_t next = 1;
  if (auto fmt = std::get_if<std::string>(&arg(args, 0))) {
    for (std::size_t i = 0; i < fmt->size(); ++i) {
      char c = (*fmt)[i];
      if (c == '%' && i + 1 < fmt->size()) {
        char d = (*fmt)[i + 1];
        if (d == '%') {
          out += '%';
          ++i;
          continue;
        }
        if ((d == 's' || d == 'd' || d == 'j') && next < args.size()) {
          const Value& a = args[next++];
          if (d == 'd') out += format_number(interp.to_number(a));
          else if (d == 'j') {
            auto j = value_to_json(interp, a, 0);
            out += j ? j->dump() : "undefined";
          } else {
            out += interp.to_text(a);
          }
          ++i;
          continue;
        }
      }
      out += c;
    }
  } else {
    next = 0;
  }
  for (; next < args.size(); ++next) {
    if (!out.empty() || next > 0) out += ' ';
    out += interp.display(args[next]);
  }
  return out;
}

std::vector<HostFunctionInfo> build_table() {
  using C = SinkCategory;
  std::vector<HostFunctionInfo> t;
  auto add = [&](std::string module, std::string name, C category, HostSemantics fn) {
    t.push_back(HostFunctionInfo{std::move(module), std::move(name), category, std::nullopt,
                                 std::move(fn)});
  };

  auto exec_like = [](bool sync) {
    return [sync](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
                  const AstNode& call) -> Value {
      std::string text = interp.to_text(arg(args, 0)) + options_summary(interp, arg(args, 1));
      log_effect(interp, call, "child_process", sync ? "execSync" : "exec", C::ACI, text);
      if (sync) return std::string();
      return canned_process(interp);
    };
  };
  auto spawn_like = [](std::string name) {
    return [name](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
                  const AstNode& call) -> Value {
      std::string text = interp.to_text(arg(args, 0));
      if (Object* a = as_object(arg(args, 1)); a && a->kind == ObjectKind::Array)
        text += " " + interp.display(a, 1);
      text += options_summary(interp, arg(args, 2));
      log_effect(interp, call, "child_process", name, C::ACI, text);
      return canned_process(interp);
    };
  };
  add("child_process", "exec", C::ACI, exec_like(false));
  add("child_process", "execSync", C::ACI, exec_like(true));
  add("child_process", "spawn", C::ACI, spawn_like("spawn"));
  add("child_process", "spawnSync", C::ACI, spawn_like("spawnSync"));
  add("child_process", "fork", C::ACI, spawn_like("fork"));

  add("vm", "evalCode", C::ACE,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode& call) -> Value {
        std::string code = interp.to_text(arg(args, 0));
        log_effect(interp, call, "vm", "evalCode", C::ACE, code);
        try {
          return interp.eval_text(code, "<eval>");
        } catch (const ParseError& e) {
          interp.fail(std::string("evalCode: ") + e.what(), call.loc);
        } catch (const LexError& e) {
          interp.fail(std::string("evalCode: ") + e.what(), call.loc);
        }
      });
  add("vm", "makeFunction", C::ACE,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode& call) -> Value {
        std::vector<std::string> params;
        for (std::size_t i = 0; i + 1 < args.size(); ++i) params.push_back(interp.to_text(args[i]));
        std::string body = args.empty() ? std::string() : interp.to_text(args.back());
        log_effect(interp, call, "vm", "makeFunction", C::ACE, body);
        try {
          return interp.make_function_from_text(params, body, "<function>");
        } catch (const ParseError& e) {
          interp.fail(std::string("makeFunction: ") + e.what(), call.loc);
        } catch (const LexError& e) {
          interp.fail(std::string("makeFunction: ") + e.what(), call.loc);
        }
      });
  add("module", "load", C::LFI,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode& call) -> Value {
        std::string path = interp.to_text(arg(args, 0));
        auto resolved = resolve_package_path(call.loc.file, path);
        log_effect(interp, call, "module", "load", C::LFI, resolved.value_or(path));
        if (!resolved) interp.fail("HostError: module path '" + path + "' escapes the package", call.loc);
        return interp.require_module(call.loc.file, path, call);
      });
  add("fs", "readFile", C::FileRead,
      [](Interpreter& interp, HostEnvironment& host, std::vector<Value>& args,
         const AstNode& call) -> Value {
        std::string path = interp.to_text(arg(args, 0));
        log_effect(interp, call, "fs", "readFile", C::FileRead, path);
        auto resolved = resolve_package_path(call.loc.file, path);
        if (resolved)
          if (auto text = host.files().read(*resolved)) return *text;
        return std::string();
      });
  add("fs", "writeFile", C::FileWrite,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode& call) -> Value {
        log_effect(interp, call, "fs", "writeFile", C::FileWrite,
                   interp.to_text(arg(args, 0)) + " " + interp.to_text(arg(args, 1)));
        return Undefined{};
      });
  add("net", "request", C::Network,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode& call) -> Value {
        log_effect(interp, call, "net", "request", C::Network, interp.to_text(arg(args, 0)));
        Object* r = interp.make_object();
        r->set_own("status", 200.0);
        r->set_own("body", std::string());
        return r;
      });

  auto print = [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
                  const AstNode&) -> Value {
    std::string line;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) line += ' ';
      line += interp.display(args[i]);
    }
    interp.append_stdout(std::move(line));
    return Undefined{};
  };
  add("console", "log", C::None, print);
  add("console", "error", C::None, print);

  add("json", "parse", C::None,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode& call) -> Value {
        json j = json::parse(interp.to_text(arg(args, 0)), nullptr, false);
        if (j.is_discarded()) interp.fail("json.parse: invalid JSON", call.loc);
        return value_from_json(interp, j);
      });
  add("json", "stringify", C::None,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode&) -> Value {
        auto j = value_to_json(interp, arg(args, 0), 0);
        if (!j) return Undefined{};
        return j->dump();
      });
  add("obj", "bare", C::None,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>&, const AstNode&) -> Value {
        return interp.make_bare_object();
      });
  add("obj", "keys", C::None,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode&) -> Value {
        std::vector<Value> keys;
        if (Object* o = as_object(arg(args, 0))) {
          if (o->kind == ObjectKind::Array)
            for (std::size_t i = 0; i < o->elements.size(); ++i) keys.emplace_back(std::to_string(i));
          for (const auto& [k, v] : o->props) keys.emplace_back(k);
        }
        return interp.make_array(std::move(keys));
      });
  add("test", "assert", C::None,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode& call) -> Value {
        if (!truthy(arg(args, 0))) {
          std::string msg = args.size() > 1 ? interp.to_text(args[1]) : "assertion failed";
          interp.fail("AssertionError: " + msg, call.loc);
        }
        return Undefined{};
      });
  add("test", "equal", C::None,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode& call) -> Value {
        if (!strict_equals(arg(args, 0), arg(args, 1)))
          interp.fail("AssertionError: " + interp.display(arg(args, 0), 1) +
                          " !== " + interp.display(arg(args, 1), 1),
                      call.loc);
        return Undefined{};
      });
  add("util", "format", C::None,
      [](Interpreter& interp, HostEnvironment&, std::vector<Value>& args,
         const AstNode&) -> Value { return format_text(interp, args); });
  return t;
}

}  // namespace

const std::vector<HostFunctionInfo>& host_function_table() {
  static const std::vector<HostFunctionInfo> table = build_table();
  return table;
}

bool is_test_file(const std::string& path) {
  std::string first = path.substr(0, path.find('/'));
  if (first == "test" || first == "tests" || first == "__tests__" || first == "spec")
    return true;
  std::string name = path.substr(path.rfind('/') == std::string::npos ? 0 : path.rfind('/') + 1);
  return name.find(".test.") != std::string::npos || name.find(".spec.") != std::string::npos;
}

// ---- package files ----

PackageFiles::PackageFiles(std::filesystem::path root) : root_(std::move(root)) {}

PackageFiles::PackageFiles(std::map<std::string, std::string> in_memory)
    : memory_(std::move(in_memory)) {}

std::optional<std::string> PackageFiles::read(const std::string& path) const {
  if (memory_) {
    auto it = memory_->find(path);
    if (it == memory_->end()) return std::nullopt;
    return it->second;
  }
  std::ifstream in(root_ / path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const AstNode& PackageFiles::program(const std::string& path) {
  if (auto it = parsed_.find(path); it != parsed_.end()) return *it->second;
  auto text = read(path);
  if (!text) throw std::runtime_error("no such file: " + path);
  auto program = parse_source(*text, path);
  const AstNode& ref = *program;
  parsed_[path] = std::move(program);
  return ref;
}

std::vector<std::string> PackageFiles::list() const {
  std::vector<std::string> out;
  if (memory_) {
    for (const auto& [k, v] : *memory_) out.push_back(k);
    return out;
  }
  std::error_code ec;
  for (auto it = std::filesystem::recursive_directory_iterator(root_, ec);
       !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec))
    if (it->is_regular_file())
      out.push_back(std::filesystem::relative(it->path(), root_).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

// ---- detection ----

std::string call_site_name(const AstNode& call, const Value& callee) {
  if (call.kind == NodeKind::Call && call.child(0).kind == NodeKind::Identifier)
    return call.child(0).text;
  if (call.kind == NodeKind::MethodCall && !call.computed) return call.text;
  if (Object* fn = as_object(peel(callee)); fn && fn->function) return fn->function->text;
  return {};
}

bool name_matches_sink(const std::string& name) {
  std::string lower = name;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower.find("exec") != std::string::npos || lower.find("spawn") != std::string::npos ||
         lower.find("fork") != std::string::npos;
}

bool is_pollutable(Interpreter&, const Value& v, const std::string& property) {
  Object* o = as_object(v);
  if (!o) return false;
  bool reaches_root = false;
  for (const Object* p = o; p; p = p->proto) {
    if (p->is_root) {
      reaches_root = true;
      continue;
    }
    if (p->find_own(property)) return false;
    if (p->kind == ObjectKind::Array && (property == "length" || is_array_index(property)))
      return false;
  }
  return reaches_root;
}

std::optional<std::vector<std::string>> check_special(Interpreter& interp,
                                                      const HostFunctionInfo& fn,
                                                      const std::vector<Value>& plain_args) {
  if (!fn.special) return std::nullopt;
  const auto idx = static_cast<std::size_t>(fn.special->arg_index);
  if (idx >= plain_args.size()) return std::nullopt;
  for (const auto& group : fn.special->groups) {
    bool all = std::all_of(group.begin(), group.end(), [&](const std::string& p) {
      return is_pollutable(interp, plain_args[idx], p);
    });
    if (all) return group;
  }
  return std::nullopt;
}

std::vector<SourceLocation> GadgetAnalysis::stack_locations(const AstNode* extra) const {
  std::vector<SourceLocation> out;
  if (Interpreter* interp = interpreter())
    for (const AstNode* n : interp->call_stack()) out.push_back(n->loc);
  if (extra) out.push_back(extra->loc);
  return out;
}

namespace {

bool only_tests(const std::vector<SourceLocation>& stack) {
  return !stack.empty() && std::all_of(stack.begin(), stack.end(), [](const SourceLocation& l) {
    return is_test_file(l.file);
  });
}

std::string join_path(std::size_t index, const std::vector<std::string>& path) {
  std::string out = std::to_string(index);
  for (const auto& p : path) out += "." + p;
  return out;
}

}  // namespace

std::vector<Value> GadgetAnalysis::on_call_pre(const Value& callee, const Value& self,
                                               std::vector<Value> args, const AstNode& node) {
  args = TaintAnalysis::on_call_pre(callee, self, std::move(args), node);
  if (!config().inject) return args;
  Object* fn = as_object(peel(callee));
  if (!fn || fn->kind != ObjectKind::Function) return args;
  std::string name = call_site_name(node, callee);
  // A mock handed around under another name still matches by its own name.
  if (!name_matches_sink(name) && fn->function) name = fn->function->text;
  if (!name_matches_sink(name)) return args;
  for (std::size_t i = 0; i < args.size(); ++i) {
    for (const auto& found : find_taints(args[i])) {
      SinkHit hit;
      hit.mode = SinkMode::NameMatched;
      hit.sink = name;
      hit.category = SinkCategory::ACI;
      hit.sink_loc = node.loc;
      hit.sources = found.taint->sources;
      hit.flow = found.taint->flow;
      hit.flow.push_back(FlowStep{FlowKind::SinkArg, name, node.loc});
      hit.arg_path = join_path(i, found.path);
      hit.call_stack = stack_locations(&node);
      hit.sink_reached_only_from_test_files = only_tests(hit.call_stack);
      hits_.push_back(std::move(hit));
    }
  }
  return args;
}

void GadgetAnalysis::record_standard(const HostFunctionInfo& fn,
                                     const std::vector<FoundTaint>& taints, int arg_index,
                                     const AstNode& call) {
  for (const auto& found : taints) {
    SinkHit hit;
    hit.mode = SinkMode::Standard;
    hit.sink = fn.qualified();
    hit.category = fn.category;
    hit.sink_loc = call.loc;
    hit.sources = found.taint->sources;
    hit.flow = found.taint->flow;
    hit.flow.push_back(FlowStep{FlowKind::SinkArg, hit.sink, call.loc});
    hit.arg_path = join_path(static_cast<std::size_t>(arg_index), found.path);
    hit.call_stack = stack_locations(nullptr);
    hit.sink_reached_only_from_test_files = only_tests(hit.call_stack);
    hits_.push_back(std::move(hit));
  }
}

void GadgetAnalysis::record_special(const HostFunctionInfo& fn,
                                    const std::vector<std::string>& group, const AstNode& call) {
  SinkHit hit;
  hit.mode = SinkMode::Special;
  hit.sink = fn.qualified();
  hit.category = fn.category;
  hit.sink_loc = call.loc;
  hit.flow.push_back(FlowStep{FlowKind::SinkArg, hit.sink, call.loc});
  for (const auto& p : group) hit.arg_path += (hit.arg_path.empty() ? "" : ",") + p;
  hit.call_stack = stack_locations(nullptr);
  hit.sink_reached_only_from_test_files = only_tests(hit.call_stack);
  hits_.push_back(std::move(hit));
}

// ---- host environment ----

HostEnvironment::HostEnvironment(PackageFiles& files, const std::vector<SpecialRow>& special_table,
                                 GadgetAnalysis* analysis)
    : files_(files), analysis_(analysis) {
  for (const auto& base : host_function_table()) {
    HostFunctionInfo& fn = functions_.emplace_back(base);
    for (const auto& row : special_table)
      if (row.module == fn.module && row.name == fn.name) fn.special = row.condition;
    natives_.push_back(NativeFunction{fn.qualified(), nullptr, &fn});
  }
}

void HostEnvironment::install(Interpreter& interp, Environment& globals) {
  Object* std_ns = interp.make_bare_object();
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    const HostFunctionInfo& fn = functions_[i];
    Value* slot = std_ns->find_own(fn.module);
    if (!slot) {
      std_ns->set_own(fn.module, interp.make_bare_object());
      slot = std_ns->find_own(fn.module);
    }
    as_object(*slot)->set_own(fn.name, interp.make_native(natives_[i]));
  }
  Object* process = interp.make_bare_object();
  process->set_own("argv0", std::string("node"));
  process->set_own("platform", std::string("linux"));
  process->set_own("env", interp.make_bare_object());
  std_ns->set_own("process", process);
  globals.vars["std"] = std_ns;
}

Value HostEnvironment::invoke(Interpreter& interp, const HostFunctionInfo& fn, const Value&,
                              std::vector<Value>& args, const AstNode& call) {
  ++call_counts_[fn.qualified()];
  if (fn.module != "console" && fn.module != "obj" && fn.module != "test") ++api_calls_;
  std::vector<Value> plain;
  plain.reserve(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    Unwrapped u = unwrap_deep(interp, args[i]);
    if (analysis_ && fn.category != SinkCategory::None && !u.taints.empty())
      analysis_->record_standard(fn, u.taints, static_cast<int>(i), call);
    plain.push_back(std::move(u.plain));
  }
  if (analysis_ && analysis_->config().inject)
    if (auto group = check_special(interp, fn, plain)) analysis_->record_special(fn, *group, call);
  for (const auto& v : plain)
    if (!find_taints(v).empty())
      throw std::logic_error("host function " + fn.qualified() + " observed a tainted value");
  return fn.semantics(interp, *this, plain, call);
}

const AstNode& HostEnvironment::load_program(const std::string& path) {
  return files_.program(path);
}

}  // namespace gadgetforge
