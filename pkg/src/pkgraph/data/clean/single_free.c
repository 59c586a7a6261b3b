void foo()
{
    char* ptr = (char*)malloc(8);
    doSomething(ptr);
    free(ptr);
}
