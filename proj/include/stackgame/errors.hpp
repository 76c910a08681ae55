#pragma once

#include <stdexcept>
#include <string>

namespace stackgame {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The derived partner delay weight left (0, 1).
class EtaOutOfRange : public Error {
public:
    EtaOutOfRange(double eta, const std::string& what) : Error(what), eta_(eta) {}
    double eta() const { return eta_; }

private:
    double eta_;
};

/// c_F >= c_bar: the premium band is empty.
class DegenerateBand : public Error {
public:
    DegenerateBand(double c_F, double c_bar, const std::string& what)
        : Error(what), c_F_(c_F), c_bar_(c_bar) {}
    double c_F() const { return c_F_; }
    double c_bar() const { return c_bar_; }

private:
    double c_F_, c_bar_;
};

class NoCaseMatched : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

/// The discretised price left (0, inf) and the run asked for resampling, which gave up.
class NonPositivePrice : public Error {
public:
    using Error::Error;
};

class ScenarioParseError : public Error {
public:
    using Error::Error;
};

}  // namespace stackgame
