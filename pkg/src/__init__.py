# __init__.py
# Marca este directorio como un paquete Python
