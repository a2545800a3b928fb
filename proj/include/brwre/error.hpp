// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace brwre {

enum class ErrorKind
{
    config,       //!< invalid user input or violated precondition
    numeric,      //!< domain, regime or convergence failure
    unsupported,  //!< operation not defined for this object
    io
};

class Error : public std::runtime_error
{
  public:
    Error(ErrorKind kind, std::string const& what)
        : std::runtime_error(what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

inline Error config_error(std::string const& what)
{
    return {ErrorKind::config, what};
}
inline Error numeric_error(std::string const& what)
{
    return {ErrorKind::numeric, what};
}
inline Error unsupported_error(std::string const& what)
{
    return {ErrorKind::unsupported, what};
}
inline Error io_error(std::string const& what)
{
    return {ErrorKind::io, what};
}

}  // namespace brwre
