#include "ppgpt/check/spec_checker.hpp"

#include <algorithm>
#include <functional>

#include "ppgpt/common/error.hpp"

namespace ppgpt::check {

using namespace frontend;

namespace {

void walk_expr(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const auto& o : e.operands)
    if (o) walk_expr(*o, fn);
  for (const auto& o : e.options)
    if (o.value) walk_expr(*o.value, fn);
}

void walk_stmt(const Stmt& s, const std::function<void(const Expr&)>& fn) {
  if (s.expr) walk_expr(*s.expr, fn);
  if (s.expr2) walk_expr(*s.expr2, fn);
  for (const auto& c : s.children)
    if (c) walk_stmt(*c, fn);
}

bool has_side_effect(const Expr& e) {
  bool found = false;
  walk_expr(e, [&](const Expr& x) {
    if (x.kind == ExprKind::Assign) found = true;
    if (x.kind == ExprKind::Unary && (x.name == "++" || x.name == "--" || x.name == "post++" ||
                                      x.name == "post--" || x.name == "delete"))
      found = true;
  });
  return found;
}

bool has_issue_at(const std::vector<Diagnostic>& ds, Span s) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return s.contains(d.span); });
}

}  // namespace

bool check_target_coverage(const ResolvedProgram& program, const ResolvedSpec& rule, const std::string& target) {
  if (program.functions_named(program.main(), target).empty())
    throw Error("unknown target function '" + target + "' in contract " + program.main().name);
  if (rule.unit().kind != SpecKind::Rule) return false;
  bool covered = false;
  for (const auto& s : rule.unit().body) {
    walk_stmt(*s, [&](const Expr& e) {
      if (e.kind != ExprKind::Call) return;
      const ExprInfo* i = rule.info(e);
      if (i && i->call == CallKind::Internal && i->function && i->function->name() == target) covered = true;
    });
  }
  return covered;
}

CheckReport check_spec(const ResolvedProgram& program, const ResolvedSpec& spec, const std::optional<std::string>& target) {
  CheckReport report;
  const SpecUnit& u = spec.unit();
  const SourceFile& src = *spec.file->source;
  auto& issues = report.issues;
  issues = spec.diagnostics;

  auto condition = [&](const std::vector<ExprPtr>& es, const char* what) {
    for (const auto& e : es) {
      if (has_side_effect(*e)) {
        issues.push_back(make_diagnostic(src, e->span, codes::kStatementForm,
                                         std::string("only expression statements are permitted in ") + what));
        continue;
      }
      const ExprInfo* i = spec.info(*e);
      if (i && i->type && i->type->kind != TypeKind::Bool && !has_issue_at(issues, e->span))
        issues.push_back(make_diagnostic(src, e->span, codes::kNotBoolean,
                                         std::string(what) + " must be a boolean expression, found " +
                                             type_string(*i->type)));
    }
  };

  switch (u.kind) {
    case SpecKind::Invariant:
      condition(u.exprs, "invariant");
      break;
    case SpecKind::FunctionSpec:
      condition(u.pre, "precondition");
      condition(u.post, "postcondition");
      break;
    case SpecKind::Rule:
      for (const auto& s : u.body) {
        walk_stmt(*s, [&](const Expr& e) {
          if (e.kind != ExprKind::Call) return;
          const ExprInfo* i = spec.info(e);
          if (!i || (i->call != CallKind::Assume && i->call != CallKind::Assert) || e.operands.size() < 2) return;
          const ExprInfo* a = spec.info(*e.operands[1]);
          if (a && a->type && a->type->kind != TypeKind::Bool && !has_issue_at(issues, e.operands[1]->span))
            issues.push_back(make_diagnostic(src, e.operands[1]->span, codes::kNotBoolean,
                                             std::string(i->call == CallKind::Assume ? "assume" : "assert") +
                                                 " condition must be a boolean expression, found " +
                                                 type_string(*a->type)));
        });
      }
      break;
  }

  if (target && u.kind == SpecKind::Rule && spec.ok()) report.coverage[u.name] = check_target_coverage(program, spec, *target);
  report.ok = issues.empty();
  return report;
}

CheckReport check_spec_file(const ResolvedProgram& program, std::shared_ptr<const SpecFile> file,
                            const std::optional<std::string>& target) {
  CheckReport all;
  for (size_t i = 0; i < file->units.size(); ++i) {
    auto rs = resolve_spec(program, file, i);
    auto r = check_spec(program, *rs, target);
    all.issues.insert(all.issues.end(), r.issues.begin(), r.issues.end());
    all.coverage.insert(r.coverage.begin(), r.coverage.end());
  }
  all.ok = all.issues.empty();
  return all;
}

}  // namespace ppgpt::check
