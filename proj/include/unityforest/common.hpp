#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace unityforest {

enum class Task { Classification, Regression };

// Base for all library errors; subclasses map onto C API status codes.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

inline std::string task_name(Task t) {
  return t == Task::Classification ? "classification" : "regression";
}

} // namespace unityforest
