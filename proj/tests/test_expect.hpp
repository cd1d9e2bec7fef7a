#pragma once

#include <exception>
#include <functional>
#include <string>

#include <gtest/gtest.h>

namespace dyncal::test {

// Runs `fn` and checks it throws E with `needle` in the message.
template <typename E>
::testing::AssertionResult throws_with(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const E& e) {
    if (std::string(e.what()).find(needle) != std::string::npos) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "message '" << e.what() << "' lacks '" << needle << "'";
  } catch (const std::exception& e) {
    return ::testing::AssertionFailure() << "wrong exception type: " << e.what();
  }
  return ::testing::AssertionFailure() << "nothing thrown";
}

}  // namespace dyncal::test
