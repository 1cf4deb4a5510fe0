#include <cstdio>

int main() {
  std::puts("ecl: placeholder");
  return 0;
}
