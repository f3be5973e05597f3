"""affine-mars 설정 및 환경변수 로드.

모든 값은 import 시점에 환경변수에서 읽는다. 라이브러리 함수는 호출 시점에
`config.<NAME>`을 참조하므로 테스트에서 패치할 수 있다.
"""
import os

# build_mars 2^|P| 폭증 방지 (오프셋 패밀리 최대 개수)
MAX_FAMILIES: int = int(os.environ.get("MARS_MAX_FAMILIES", "16"))

# 오라클 기본 타일 박스 반경 ([-N, N]^t)
TILE_BOX: int = int(os.environ.get("MARS_TILE_BOX", "3"))

# fd_partition 기본 타일 박스 반경 (2차원에서 7x7)
FD_BOX: int = int(os.environ.get("MARS_FD_BOX", "3"))

# 정확 사영 1회당 셀 예산. 초과 시 추측 대신 UndecidedError
MAX_CELLS: int = int(os.environ.get("MARS_MAX_CELLS", "20000"))

# 열거 1회당 격자 점 수 상한
ENUM_LIMIT: int = int(os.environ.get("MARS_ENUM_LIMIT", "2000000"))

# 유계 셀의 공집합 판정과 집합 비교를 직접 열거로 처리하는 최대 박스 크기
FAST_ENUM: int = int(os.environ.get("MARS_FAST_ENUM", "65536"))

# 사영 중 유계 변수를 값별로 나누는 최대 범위 (넘으면 잉여류 분할/splinter)
SPLIT_VALUES: int = int(os.environ.get("MARS_SPLIT_VALUES", "64"))

# 커널 코셋 안에서 짧은 대표 오프셋을 찾는 탐색 반경
COSET_RADIUS: int = int(os.environ.get("MARS_COSET_RADIUS", "2"))

# CLI 기본 로그 레벨
LOG_LEVEL: str = os.environ.get("MARS_LOG_LEVEL", "WARNING")
