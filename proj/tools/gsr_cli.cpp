#include <cstdio>

int main() {
    std::puts("gsr cli placeholder");
    return 0;
}
