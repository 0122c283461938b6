#include "consensus_lab/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string_view>
#include <vector>

#include "consensus_lab/errors.hpp"

namespace consensus_lab {

struct Expression::Node {
  enum class Kind { kConstant, kChannel, kTime, kMass, kUnary, kBinary, kCall };
  Kind kind = Kind::kConstant;
  double value = 0.0;
  int channel = 0;
  char op = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

double eval(const Node& n, const Eigen::Ref<const Eigen::VectorXd>& x, double t,
            double m) {
  switch (n.kind) {
    case Node::Kind::kConstant:
      return n.value;
    case Node::Kind::kChannel:
      return x(n.channel - 1);
    case Node::Kind::kTime:
      return t;
    case Node::Kind::kMass:
      return m;
    case Node::Kind::kUnary:
      return -eval(*n.lhs, x, t, m);
    case Node::Kind::kCall:
      return n.fn(eval(*n.lhs, x, t, m));
    case Node::Kind::kBinary: {
      const double a = eval(*n.lhs, x, t, m);
      const double b = eval(*n.rhs, x, t, m);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        case '^': return std::pow(a, b);
      }
    }
  }
  return std::nan("");
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    NodePtr root = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

  int max_channel = 0;
  bool uses_time = false;

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("", "expression \"" + std::string(text_) + "\" at offset " +
                                  std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::kBinary;
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = binary('+', lhs, parse_product());
      } else if (accept('-')) {
        lhs = binary('-', lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary('*', lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary('/', lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::kUnary;
      n->lhs = parse_unary();
      return n;
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return binary('^', base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      NodePtr inner = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double value = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<size_t>(end - rest.c_str());
    auto n = std::make_shared<Node>();
    n->value = value;
    return n;
  }

  NodePtr parse_name() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));

    static const struct {
      const char* name;
      double (*fn)(double);
    } kFunctions[] = {
        {"sin", [](double x) { return std::sin(x); }},
        {"cos", [](double x) { return std::cos(x); }},
        {"tan", [](double x) { return std::tan(x); }},
        {"exp", [](double x) { return std::exp(x); }},
        {"log", [](double x) { return std::log(x); }},
        {"sqrt", [](double x) { return std::sqrt(x); }},
        {"abs", [](double x) { return std::abs(x); }},
    };
    for (const auto& f : kFunctions) {
      if (name == f.name) {
        if (!accept('(')) fail("expected '(' after " + name);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::kCall;
        n->fn = f.fn;
        n->lhs = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return n;
      }
    }

    auto n = std::make_shared<Node>();
    if (name == "s" || name == "v") {
      n->kind = Node::Kind::kChannel;
      n->channel = name == "s" ? 1 : 2;
    } else if (name.size() > 1 && name[0] == 'x' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos) {
      n->kind = Node::Kind::kChannel;
      n->channel = std::stoi(name.substr(1));
      if (n->channel < 1) fail("state channels are 1-based");
    } else if (name == "t") {
      n->kind = Node::Kind::kTime;
      uses_time = true;
    } else if (name == "m") {
      n->kind = Node::Kind::kMass;
    } else if (name == "g") {
      n->value = 9.81;
    } else if (name == "pi") {
      n->value = std::numbers::pi;
    } else {
      fail("unknown name '" + name + "'");
    }
    if (n->kind == Node::Kind::kChannel && n->channel > max_channel) max_channel = n->channel;
    return n;
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser parser(text);
  Expression e;
  e.root_ = parser.parse_all();
  e.text_ = text;
  e.max_channel_ = parser.max_channel;
  e.uses_time_ = parser.uses_time;
  return e;
}

double Expression::evaluate(const Eigen::Ref<const Eigen::VectorXd>& state, double t,
                            double mass) const {
  if (!root_) return 0.0;
  if (max_channel_ > state.size()) {
    throw DimensionMismatch("expression \"" + text_ + "\" references x" +
                            std::to_string(max_channel_) + " but the state has " +
                            std::to_string(state.size()) + " channels");
  }
  return eval(*root_, state, t, mass);
}

}  // namespace consensus_lab
