"""affine-mars: 타일링된 폴리헤드럴 프로그램의 데이터 공간을 MARS로 분할하는 분석기."""

__version__ = "0.1.0"
