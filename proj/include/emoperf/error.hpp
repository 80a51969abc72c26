#pragma once

#include <stdexcept>
#include <string>

namespace emoperf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input files (manifest, annotations, feature tables, notes, audio).
class InputError : public Error {
public:
    using Error::Error;
};

/// A computation that cannot produce a defined result for the given data.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid command-line request, detected before any work starts.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace emoperf
