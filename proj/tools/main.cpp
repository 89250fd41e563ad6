#include <cstdio>

int main() {
  std::puts("inferno: subcommands not wired yet");
  return 1;
}
