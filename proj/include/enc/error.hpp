#pragma once

#include <stdexcept>
#include <string>

namespace enc {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Two operands live on different scopes (or a subset was used with the wrong frame).
class ScopeError : public Error {
public:
    using Error::Error;
};

// Input numbers do not form a basic belief assignment (bad sum, negative mass, ...).
class MassError : public Error {
public:
    using Error::Error;
};

// normalize() was asked to rescale a function whose whole mass sits on the empty set.
class ConflictError : public Error {
public:
    using Error::Error;
};

// A configured cap (product-space size, dense lattice size, focal blowup, ...) was hit.
class ResourceError : public Error {
public:
    using Error::Error;
};

// A network or document failed structural validation.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A tree-only algorithm met an undirected loop; the caller must merge nodes first.
class LoopError : public Error {
public:
    using Error::Error;
};

// A document could not be parsed at all.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace enc
