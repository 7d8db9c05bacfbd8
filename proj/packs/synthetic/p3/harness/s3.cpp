#include <cstdio>
const char* parity(long long x);
int main() {
    long long x;
    if (std::scanf("%lld", &x) != 1) return 1;
    std::printf("%s\n", parity(x));
    return 0;
}
