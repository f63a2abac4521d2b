// A small Python subset and its syntax-directed stack graph construction.
//
//   from m import *          ImportStar
//   class C(B):              ClassDef; the body holds `name = expr` fields or `pass`
//   name = expr              Assign
//   expr                     ExprStmt; expr is a name, integer, attribute
//                            access `e.a`, call `e()`, or `print(e)`
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stackres/graph.hpp"

namespace stackres::minilang {

struct Name {
  std::string id;
  Span span;
};

struct Expr {
  enum class Kind { Name, Attr, Call, IntLit, Print };

  Kind kind = Kind::IntLit;
  Name name;                    // Name: the identifier; Attr: the attribute
  std::string literal;          // IntLit
  std::unique_ptr<Expr> inner;  // Attr: base; Call: callee; Print: argument
};

struct Stmt {
  enum class Kind { ImportStar, ClassDef, Assign, ExprStmt };

  Kind kind = Kind::ExprStmt;
  Name name;                 // ImportStar: module; ClassDef: class; Assign: target
  std::optional<Name> base;  // ClassDef only
  std::vector<Stmt> body;    // ClassDef fields (Assign only)
  std::optional<Expr> value; // Assign / ExprStmt
};

struct Module {
  std::string name;  // display name's basename without extension
  Span extent;       // the whole file
  std::vector<Stmt> statements;
};

/// basename("dir/b.py") minus its extension -> "b".
std::string module_name(std::string_view display_name);

/// Throws Error{SyntaxError} with a 1-based "line:col" prefix.
Module parse(std::string_view source, std::string_view display_name);

/// Emits the module's gadgets into `file`, which must be empty. Does not seal.
void build_graph(const Module& module, StackGraph& graph, FileId file);

}  // namespace stackres::minilang
