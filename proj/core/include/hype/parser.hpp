#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hype/model.hpp"
#include "hype/source.hpp"

namespace hype {

struct ParseError {
    SourceSpan span;
    std::string message;
    /// Token kinds that would have been accepted; empty for semantic errors.
    std::vector<std::string> expected;
    /// Set when the error comes from model validation rather than syntax.
    std::optional<ViolationKind> violation;

    [[nodiscard]] std::string to_string() const;
};

struct ParseResult {
    std::optional<HypeModel> model;
    std::vector<ParseError> errors;

    [[nodiscard]] bool ok() const noexcept { return model.has_value() && errors.empty(); }
};

/// Parses and validates a model. `model` is set whenever the text was
/// syntactically well formed, even if validation then reported errors.
[[nodiscard]] ParseResult parse_model(std::string_view text, std::string file = {});

/// Reads a file; an unreadable path yields a single error at line 1.
[[nodiscard]] ParseResult parse_model_file(const std::filesystem::path& path);

/// Parses, validates and throws ModelError (all diagnostics in the message)
/// unless the model is clean.
[[nodiscard]] HypeModel load_model(std::string_view text, std::string file = {});
[[nodiscard]] HypeModel load_model_file(const std::filesystem::path& path);

/// Parses a single expression, e.g. for tests and `--set` style inputs.
[[nodiscard]] Expr parse_expression(std::string_view text);

/// Canonical concrete syntax of a model.
[[nodiscard]] std::string pretty_print(const HypeModel& model);

/// Controller term in concrete syntax; stochastic events get their `~`
/// when a model is supplied.
[[nodiscard]] std::string to_string(const ControllerTerm& term, const HypeModel* model = nullptr);

} // namespace hype
