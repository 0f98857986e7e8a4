#include <iostream>

int main() {
  std::cout << "tracequery: not wired up yet\n";
  return 0;
}
