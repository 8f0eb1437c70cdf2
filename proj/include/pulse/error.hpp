// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pulse {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument to an operation (bad configuration, out-of-domain input).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Wire-format problems in containers, patches, manifests, or codec streams.
class FormatError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncationError : public FormatError {
public:
    using FormatError::FormatError;
};

class CorruptStreamError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Mismatch between a patch/operation and the checkpoint it is applied to:
/// tensor-set differences, shape differences, unknown tensors, bad indices.
class ModelMismatchError : public Error {
public:
    using Error::Error;
};

class ShapeMismatchError : public ModelMismatchError {
public:
    using ModelMismatchError::ModelMismatchError;
};

class TensorSetError : public ModelMismatchError {
public:
    using ModelMismatchError::ModelMismatchError;
};

class IndexRangeError : public ModelMismatchError {
public:
    using ModelMismatchError::ModelMismatchError;
};

/// A representation cannot hold the tensor (e.g. flat int32 indices for a
/// tensor with 2^31 or more elements).
class DimensionError : public ModelMismatchError {
public:
    using ModelMismatchError::ModelMismatchError;
};

/// Reconstructed weights hash differs from the recorded target hash.
class HashMismatchError : public Error {
public:
    HashMismatchError(std::string expected_hex, std::string actual_hex)
        : Error("hash mismatch: expected " + expected_hex + ", actual " + actual_hex),
          expected(std::move(expected_hex)),
          actual(std::move(actual_hex)) {}

    std::string expected;
    std::string actual;
};

/// Object-store failures: I/O, authentication, backend errors.
class StoreError : public Error {
public:
    using Error::Error;
};

class StoreUnreachableError : public StoreError {
public:
    using StoreError::StoreError;
};

class MissingKeyError : public StoreError {
public:
    using StoreError::StoreError;
};

/// Manifest signature rejected.
class SignatureError : public Error {
public:
    using Error::Error;
};

/// Chain-level violations: ready marker without its objects, gaps in the
/// published chain, no published checkpoints at all.
class ProtocolViolationError : public Error {
public:
    using Error::Error;
};

}  // namespace pulse
