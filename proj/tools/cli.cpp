#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "mutgen/clique.hpp"
#include "mutgen/evaluator.hpp"
#include "mutgen/flag_transform.hpp"

namespace mutgen::cli {

namespace {

// Head symbol without any package prefix (`flag::make-flag` -> `make-flag`).
std::string bare_head(const SExpr& form) {
  if (!form.is_cons() || !form[0].is_symbol()) return {};
  const std::string& text = form[0].text();
  auto sep = text.rfind("::");
  return Symbol(sep == std::string::npos ? text : text.substr(sep + 2)).key();
}

std::optional<Symbol> keyword_symbol(const SExpr& form, std::string_view key) {
  auto items = form.items();
  for (std::size_t i = 1; i + 1 < items.size(); ++i) {
    if (items[i].is_symbol(key) && items[i + 1].is_symbol()) return items[i + 1].as_symbol();
  }
  return std::nullopt;
}

struct SourceForm {
  SExpr form;
  /// Clique the form names or lives in, when known.
  std::optional<Symbol> clique;
};

// Everything found in one input file.
struct Workspace {
  std::vector<CliqueDef> cliques;
  /// Index of the last clique that came from a mutual-recursion or defines
  /// form, as opposed to a lone defun or define.
  std::optional<std::size_t> last_group;
  std::vector<SourceForm> sources;

  CliqueDef& clique_named(const Symbol& name, SourcePos pos) {
    for (auto& c : cliques) {
      if (c.name == name) return c;
    }
    throw FormError("no clique named " + name.text() + " in the input", pos);
  }

  CliqueDef& clique_with_member(const Symbol& fn, SourcePos pos) {
    for (auto it = cliques.rbegin(); it != cliques.rend(); ++it) {
      if (it->is_member(fn)) return *it;
    }
    throw FormError("no clique defines function " + fn.text(), pos);
  }
};

class Session {
 public:
  Session(const RunConfig& config, std::string_view input) : config_(config), input_(input) {}

  RunResult run() {
    RunResult result;
    try {
      validate();
      load();
      result.exit_code = dispatch(result);
    } catch (const Error& e) {
      SourcePos pos = e.has_pos() ? e.pos() : current_pos_;
      result.exit_code = 1;
      result.output.clear();
      result.diagnostics += location(pos) + "error: " + e.what() + "\n";
    }
    return result;
  }

 private:
  std::string location(SourcePos pos) const {
    std::string file = config_.input_path.empty() ? "<input>" : config_.input_path;
    if (!pos.known()) pos = SourcePos{1, 1};
    return file + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": ";
  }

  void validate() const {
    if (config_.stage && config_.command != Command::Expand) {
      throw Error("--stage is only valid with the expand command");
    }
    if (config_.trials && config_.command != Command::CheckEquiv) {
      throw Error("--trials is only valid with the check-equiv command");
    }
    if (config_.trials && *config_.trials == 0) throw Error("--trials must be positive");
    if (config_.wrap_encapsulate && config_.command != Command::Expand) {
      throw Error("--wrap-encapsulate is only valid with the expand command");
    }
  }

  void load() {
    for (const auto& form : read_all(input_)) {
      current_pos_ = form.pos();
      std::string head = bare_head(form);
      if (is_clique_form(form)) {
        CliqueDef clique = parse_clique(form);
        for (const auto& post : clique.post_forms) add_source(post, clique.name);
        if (head == "mutual-recursion" || head == "defines") ws_.last_group = ws_.cliques.size();
        ws_.cliques.push_back(std::move(clique));
      } else if (head == "make-flag") {
        if (form.size() < 3 || !form[1].is_symbol() || !form[2].is_symbol()) {
          throw FormError("expected (make-flag <flag-fn> <clique-fn>)", form.pos());
        }
        ws_.clique_with_member(form[2].as_symbol(), form.pos()).flag_fn_name = form[1].as_symbol();
      } else {
        add_source(form, std::nullopt);
      }
    }
    current_pos_ = {};
  }

  void add_source(const SExpr& form, std::optional<Symbol> home) {
    std::string head = bare_head(form);
    if (head == "defret-mutual-generate" || head == "defret-mutual") {
      auto named = keyword_symbol(form, ":mutual-recursion");
      ws_.sources.push_back({form, named ? named : home});
    } else if (head == "sk-scaffold") {
      ws_.sources.push_back({form, home});
    }
  }

  const CliqueDef& select_clique(const std::optional<Symbol>& hint, SourcePos pos) {
    if (config_.clique_name) return ws_.clique_named(Symbol(*config_.clique_name), pos);
    if (hint) return ws_.clique_named(*hint, pos);
    if (ws_.cliques.empty()) throw FormError("the input defines no clique", pos);
    // Helper defuns after a clique (ev-alist after subst-term) are not the
    // subject of the file.
    return ws_.last_group ? ws_.cliques[*ws_.last_group] : ws_.cliques.back();
  }

  const CliqueDef& select_clique() { return select_clique(std::nullopt, {}); }

  // Last source form with one of the given heads that applies to the
  // selected clique.
  std::pair<const SourceForm*, const CliqueDef*> select_source(std::initializer_list<std::string_view> heads) {
    for (auto it = ws_.sources.rbegin(); it != ws_.sources.rend(); ++it) {
      std::string head = bare_head(it->form);
      bool wanted = false;
      for (auto h : heads) wanted = wanted || head == h;
      if (!wanted) continue;
      std::optional<Symbol> hint = it->clique;
      if (!hint && head == "sk-scaffold" && it->form.size() > 1 && it->form[1].is_cons()) {
        hint = ws_.clique_with_member(it->form[1][0].as_symbol(), it->form.pos()).name;
      }
      if (config_.clique_name && hint && !(Symbol(*config_.clique_name) == *hint)) continue;
      current_pos_ = it->form.pos();
      return {&*it, &select_clique(hint, it->form.pos())};
    }
    std::string names;
    for (auto h : heads) names += (names.empty() ? "" : " or ") + std::string(h);
    throw FormError("the input has no " + names + " form for the selected clique");
  }

  std::string print(const SExpr& x) const { return print_canonical(x, config_.format) + "\n"; }

  std::string print_all(const std::vector<SExpr>& forms) const {
    std::string out;
    for (std::size_t i = 0; i < forms.size(); ++i) {
      if (i > 0) out += "\n";
      out += print(forms[i]);
    }
    return out;
  }

  int dispatch(RunResult& result) {
    switch (config_.command) {
      case Command::Parse:
        result.output = summarize(select_clique());
        return 0;
      case Command::MakeFlag: {
        FlagClique fc = make_flag_function(select_clique());
        result.output = print_all({fc.flag_fn_def, fc.equivalence_thm});
        return 0;
      }
      case Command::CheckEquiv: {
        const CliqueDef& clique = select_clique();
        FlagClique fc = make_flag_function(clique);
        EquivReport report = check_flag_equivalence(clique, fc, config_.trials.value_or(1000), config_.seed);
        result.output = report.describe();
        return report.ok() ? 0 : 2;
      }
      case Command::Dmgen: {
        auto [source, clique] = select_source({"defret-mutual-generate"});
        std::vector<std::string> warnings;
        SExpr out = dmgen_expand(parse_dmgen_form(source->form), *clique, &warnings);
        for (const auto& w : warnings) result.diagnostics += location(source->form.pos()) + "warning: " + w + "\n";
        result.output = print(out);
        return 0;
      }
      case Command::Expand: {
        Stage stage = config_.stage.value_or(Stage::Events);
        auto [source, clique] = stage == Stage::Dmgen
                                    ? select_source({"defret-mutual-generate"})
                                    : select_source({"defret-mutual-generate", "defret-mutual"});
        Expansion expansion = full_expand(source->form, *clique);
        for (const auto& w : expansion.warnings) {
          result.diagnostics += location(source->form.pos()) + "warning: " + w + "\n";
        }
        std::vector<SExpr> forms = expansion.stage(stage);
        if (config_.wrap_encapsulate && stage == Stage::Events) forms = {wrap_encapsulate(forms)};
        result.output = print_all(forms);
        return 0;
      }
      case Command::ScaffoldSk: {
        auto [source, clique] = select_source({"sk-scaffold"});
        result.output = print_all(generate_sk_scaffold(*clique, parse_sk_scaffold(source->form)));
        return 0;
      }
    }
    return 1;
  }

  static std::string typed(const Symbol& name, const std::optional<Symbol>& type) {
    return type ? "(" + name.text() + " " + type->text() + ")" : name.text();
  }

  static std::string summarize(const CliqueDef& clique) {
    std::ostringstream out;
    out << "clique " << clique.name.text() << "\n";
    out << "  flag-function " << clique.flag_fn_name.text() << "\n";
    out << "  flag-macro " << clique.flag_macro_name().text() << "\n";
    for (const auto& fn : clique.functions) {
      out << "  function " << fn.name.text() << "\n";
      out << "    formals";
      for (const auto& f : fn.formals) out << " " << typed(f.name, f.type);
      out << "\n    returns";
      for (const auto& r : fn.returns) out << " " << typed(r.name, r.type);
      out << "\n";
    }
    return out.str();
  }

  const RunConfig& config_;
  std::string_view input_;
  Workspace ws_;
  SourcePos current_pos_;
};

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  if (name == "parse") return Command::Parse;
  if (name == "make-flag") return Command::MakeFlag;
  if (name == "check-equiv") return Command::CheckEquiv;
  if (name == "dmgen") return Command::Dmgen;
  if (name == "expand") return Command::Expand;
  if (name == "scaffold-sk") return Command::ScaffoldSk;
  return std::nullopt;
}

RunResult run(const RunConfig& config, std::string_view input) { return Session(config, input).run(); }

int main_entry(int argc, char** argv) {
  CLI::App app{"mutgen: flag functions and defret-mutual-generate expansion for mutually recursive cliques"};
  app.require_subcommand(1);

  RunConfig config;
  std::string stage_text;
  std::string format_text = "pretty";
  std::size_t trials = 1000;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", config.input_path, "Input file of S-expression forms")->required();
    sub->add_option("--output", config.output_path, "Write output here instead of stdout");
    sub->add_option("--clique", config.clique_name,
                    "Clique to use (default: the source form's clique, else the last grouped clique)");
    sub->add_option("--format", format_text, "pretty or compact")
        ->check(CLI::IsMember({"pretty", "compact"}));
  };

  struct Sub {
    const char* name;
    const char* help;
    Command command;
  };
  const Sub subs[] = {
      {"parse", "Print the normalized clique", Command::Parse},
      {"make-flag", "Print the flag function and its equivalence theorem", Command::MakeFlag},
      {"check-equiv", "Fuzz the flag function against the clique", Command::CheckEquiv},
      {"dmgen", "Expand a defret-mutual-generate form to defret-mutual", Command::Dmgen},
      {"expand", "Run the full expansion pipeline", Command::Expand},
      {"scaffold-sk", "Generate the defun-sk induction scaffold", Command::ScaffoldSk},
  };
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    Command command = s.command;
    sub->callback([&config, command] { config.command = command; });
    if (command == Command::CheckEquiv) {
      sub->add_option("--trials", trials, "Number of random trials")->check(CLI::PositiveNumber);
      sub->add_option("--seed", config.seed, "Random seed");
    }
    if (command == Command::Expand) {
      sub->add_option("--stage", stage_text, "dmgen, defret-mutual, flag-defthm, or events")
          ->check(CLI::IsMember({"dmgen", "defret-mutual", "flag-defthm", "events"}));
      sub->add_flag("--wrap-encapsulate", config.wrap_encapsulate,
                    "Wrap the final events in an encapsulate with the lemma local");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!stage_text.empty()) config.stage = parse_stage(stage_text);
  if (config.command == Command::CheckEquiv) config.trials = trials;
  config.format = format_text == "compact" ? PrintStyle::Compact : PrintStyle::Pretty;

  std::ifstream in(config.input_path, std::ios::binary);
  if (!in) {
    std::cerr << config.input_path << ":1:1: error: cannot open input file\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  RunResult result = run(config, buffer.str());
  std::cerr << result.diagnostics;
  if (config.output_path && result.exit_code != 1) {
    std::ofstream out(*config.output_path, std::ios::binary);
    if (!out) {
      std::cerr << *config.output_path << ": error: cannot write output file\n";
      return 1;
    }
    out << result.output;
  } else {
    std::cout << result.output;
  }
  return result.exit_code;
}

}  // namespace mutgen::cli
