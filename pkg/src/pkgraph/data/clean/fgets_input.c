#include <stdio.h>

void main() {
    char name[32];
    printf("name: ");
    fgets(name, 32, stdin);
    printf("hello %s\n", name);
}
