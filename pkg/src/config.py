# config.py
# 项目参数配置
#
# @date 26-10-18
#

# =============================
# 请仔细检阅所有参数！！！！
# 训练相关默认值即 KL / Clip / CIM 三种 PPO 的对比实验超参数
# =============================

# === 调试模式 ===
DEBUG_MODE = False  # 是否启用调试模式，启用后会打印更多日志信息

# === 输出配置 ===
OUTPUT_DIR     = "runs"        # 默认输出目录
OUTPUT_DIR_ENV = "RL_LAB_OUT"  # 覆盖输出目录的环境变量名

# === 网络结构 ===
HIDDEN_WIDTHS = (64, 64)  # actor / critic 隐藏层宽度 (tanh)
LOG_STD_INIT  = 0.0       # log σ 初值 (σ = 1.0)
SIGMA_FLOOR   = 1e-4      # 训练时 σ 下限

# === 优化器 ===
OPTIMIZER     = "adam"  # "adam" 或 "sgd"
ADAM_BETA1    = 0.9
ADAM_BETA2    = 0.999
ADAM_EPS      = 1e-8

# === PPO 超参数 ===
GAMMA               = 0.9     # 折扣因子
ACTOR_LR            = 1e-4    # actor 学习率
CRITIC_LR           = 2e-4    # critic 学习率
BATCH_SIZE          = 32      # 每次更新的转移数
ACTOR_UPDATE_STEPS  = 10      # actor 更新步数
CRITIC_UPDATE_STEPS = 10      # critic 更新步数
CLIP_EPSILON        = 0.2     # Clip-PPO ε
KL_BETA_INIT        = 0.5     # KL-PPO 初始 β
KL_D_TARG           = 0.1     # KL-PPO d_targ
CIM_ALPHA           = 1.0     # CIM-PPO α
ADV_STD_FLOOR       = 1e-8    # 优势归一化的标准差下限
RETURN_WINDOW       = 10      # 平均回报取最近多少个完整回合
SUMMARY_TAIL        = 20      # 训练结束时汇报最后多少次迭代的平均回报

# === CIM 核函数 ===
CIM_KERNEL      = "gaussian"  # epanechnikov|biweight|triangular|laplace|gaussian|rectangular
CIM_BANDWIDTH   = 1.0         # 核带宽 σ_k
CIM_SIGMA_MODE  = "fixed"     # "fixed" 或 "silverman"
CIM_NOISE_DRAWS = 1           # 每个状态的噪声采样次数
SILVERMAN_MIN_SPREAD = 1e-8   # 低于该标准差时带宽回退为 1.0

# === 环境常数 ===
PENDULUM_G         = 10.0
PENDULUM_M         = 1.0
PENDULUM_L         = 1.0
PENDULUM_DT        = 0.05
PENDULUM_MAX_SPEED = 8.0
PENDULUM_MAX_TORQUE = 2.0
PENDULUM_MAX_STEPS = 200

POINTMASS_DT        = 0.1
POINTMASS_MAX_FORCE = 1.0
POINTMASS_MAX_STEPS = 100

# === 校验 (verify) 规模 ===
VERIFY_PAIRS          = 200      # KL 预言机随机分布对数
VERIFY_MC_SAMPLES     = 1000000  # 多维 KL Monte-Carlo 样本数
VERIFY_MC_SIGMAS      = 3.0      # Monte-Carlo 容差 (标准误倍数)
VERIFY_CIM_TRIPLES    = 1000     # CIM 三角不等式随机三元组数
VERIFY_PINSKER_PAIRS  = 100
VERIFY_PINSKER_SAMPLES = 100000
VERIFY_GRAD_DRAWS     = 20

# =================================

__all__ = [
    "DEBUG_MODE",
    "OUTPUT_DIR",
    "OUTPUT_DIR_ENV",
    "GAMMA",
    "ACTOR_LR",
    "CRITIC_LR",
    "BATCH_SIZE",
]
