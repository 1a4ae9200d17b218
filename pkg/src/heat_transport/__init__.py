# heat_transport パッケージの入口。公開APIは各モジュール（model, collision_engine, observables など）から直接 import する。
__version__ = "0.1.0"
