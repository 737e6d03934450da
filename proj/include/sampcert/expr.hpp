#pragma once

#include "sampcert/poly.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace sampcert {

/// Parse failure with the 0-based character offset of the offending input.
class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& message, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Parse an expression built from varset identifiers, decimal literals,
/// + - * ^ and parentheses. `^` takes a non-negative integer literal and
/// binds tighter than unary minus; implicit multiplication is rejected.
Polynomial parse_polynomial(std::string_view text, VarSetPtr vars);

/// A sampled-data system dx/dt = f(x(t), x(t_k)). Each f_i lives over the
/// 2n-variable set (z1..zn, x1..xn): z-slots hold the current state x(t),
/// x-slots the most recent sample x(t_k). System files spell the sampled
/// state xk1..xkn; parsing maps xk_i onto the x_i slot.
struct SystemDef {
    std::string name;
    std::size_t n = 0;
    VarSetPtr vars;
    std::vector<Polynomial> f;
};

/// z1..zn followed by x1..xn.
VarSetPtr system_varset(std::size_t n);
/// z1..zn followed by xk1..xkn, the spelling used in files.
VarSetPtr system_file_varset(std::size_t n);

/// Build a SystemDef from dynamics strings in the file spelling (z*, xk*).
SystemDef make_system(std::string name, std::size_t n,
                      const std::vector<std::string>& dynamics);

/// Parse the JSON text of a system file: {"name", "n", "dynamics": [n strings]}.
/// `context` prefixes error messages (typically the file path).
SystemDef parse_system_text(const std::string& json_text, const std::string& context = "");

/// Load and parse a system file from disk.
SystemDef parse_system(const std::string& path);

}  // namespace sampcert
