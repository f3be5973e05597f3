"""affine-mars 예외 계층.

입력 오류는 ValueError 계열로 두어 호출자가 일반적인 방식으로 잡을 수 있게 한다.
CLI는 `kind` 값으로 종료 코드와 JSON 오류 객체를 만든다.
"""


class MarsError(Exception):
    """affine-mars 최상위 예외."""

    kind = "error"


class ProgramError(MarsError, ValueError):
    """프로그램 문서 스키마/검증 오류. 메시지는 경로로 시작한다 (예: deps[1].A)."""

    kind = "program"

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DimensionMismatchError(MarsError, ValueError):
    """집합/함수 차원 불일치."""

    kind = "dimension"


class UndecidedError(MarsError):
    """정확 판정 예산을 넘겨 결론을 내리지 못함. 틀린 답 대신 발생한다."""

    kind = "undecided"


class UnboundedSetError(MarsError):
    """유계여야 하는 집합(풋프린트, 열거 대상)이 유계가 아님."""

    kind = "unbounded"


class RefusalError(MarsError):
    """분석 전제 조건을 만족하지 않아 결과 생성을 거부함."""

    kind = "refusal"


class MultipleNullSpacesError(RefusalError):
    """의존성들의 null space가 서로 다름. fd_partition으로 진단해야 한다."""

    kind = "multiple-null-spaces"


class FamilyBlowupError(RefusalError):
    """오프셋 패밀리 수가 상한을 넘음 (2^|P| 폭증 방지)."""

    kind = "family-blowup"


class BoxTooSmallError(MarsError, ValueError):
    """오라클 박스가 풋프린트나 패밀리 대표 오프셋을 담지 못함."""

    kind = "box-too-small"


class RenderError(MarsError):
    """렌더링을 지원하지 않는 차원."""

    kind = "render"
