// Two parties sketch their strings independently; a third party compares the sketches.

#include <iostream>
#include <string>

#include "circsketch/circsketch.hpp"

int main() {
  namespace cs = circsketch;
  const cs::Seed seed = cs::Seed::from_u64(2024);

  std::string text;
  for (int i = 0; text.size() < 4096; ++i) text += "sketch-" + std::to_string(i * 7919 % 10007) + ";";
  text.resize(4096);
  std::string other = text.substr(100) + text.substr(0, 100);  // a rotation of text
  other[17] = '#';
  other[2048] = '@';

  const cs::Str s1 = cs::Str::from_bytes(text);
  const cs::Str s2 = cs::Str::from_bytes(other);

  const cs::SchemePtr exact = cs::make_scheme(s1.size(), 16, std::nullopt, seed);
  const cs::CircularSketch a = cs::encode_exact(s1, exact);
  const cs::CircularSketch b = cs::encode_exact(s2, exact);
  const cs::DecodeResult best = cs::shift_exact(a, b);
  std::cout << "exact sketch: " << cs::serialized_size(a) << " bytes, kind " << a.kind() << "\n";
  std::cout << "shift distance " << best.value << " at shift " << best.shift.value_or(0) << "\n";
  std::cout << "distance at shift 0: " << cs::decode_exact(a, b, 0).value << "\n";

  const cs::SchemePtr approx = cs::make_scheme(s1.size(), 16, 0.25, seed);
  const cs::CircularSketch x = cs::encode_approx(s1, approx);
  const cs::CircularSketch y = cs::encode_approx(s2, approx);
  std::cout << "approximate shift distance " << cs::shift_approx(x, y).value << "\n";
}
